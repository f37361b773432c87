"""SL(2, Z) arithmetic on ``flint.fmpz_mat``.

Products, inverses and powers are computed by FLINT. ``fmpz_mat`` is mutable
and unhashable, so enumeration loops index their sets and tables by
``key(m)``, the row-major ``(a, b, c, d)`` tuple of integers.
"""

from math import gcd
from typing import Iterable, Tuple

from flint import fmpz_mat

Mat = fmpz_mat
Key = Tuple[int, int, int, int]
Vec = Tuple[int, int]

IDENTITY_KEY: Key = (1, 0, 0, 1)
MINUS_IDENTITY_KEY: Key = (-1, 0, 0, -1)


def matrix(entries: Iterable[int]) -> Mat:
    return fmpz_mat(2, 2, [int(x) for x in entries])


def identity() -> Mat:
    return fmpz_mat(2, 2, [1, 0, 0, 1])


def key(m: Mat) -> Key:
    return tuple(int(x) for x in m.entries())


def inv(m: Mat) -> Mat:
    # adjugate; determinant one
    return fmpz_mat(2, 2, [m[1, 1], -m[0, 1], -m[1, 0], m[0, 0]])


def power(m: Mat, n: int) -> Mat:
    if n < 0:
        m, n = inv(m), -n
    return m ** n


def product(mats: Iterable[Mat]) -> Mat:
    result = identity()
    for m in mats:
        result = result * m
    return result


def det(m: Mat) -> int:
    return int(m.det())


def trace(m: Mat) -> int:
    return int(m[0, 0] + m[1, 1])


def act(m: Mat, v: Vec) -> Vec:
    column = m * fmpz_mat(2, 1, [v[0], v[1]])
    return int(column[0, 0]), int(column[1, 0])


def is_central(m: Mat) -> bool:
    # ±I are the only diagonal scalar matrices of determinant one
    return m[0, 1] == 0 and m[1, 0] == 0 and m[0, 0] == m[1, 1]


def commute(m: Mat, n: Mat) -> bool:
    return m * n == n * m


def mod(m: Mat, q: int) -> Key:
    """Entries reduced into [0, q), as a key."""
    return tuple(int(x) % q for x in m.entries())


def canonical_pair(p: int, q: int) -> Vec:
    """Sign-normalize a primitive vector: q > 0, or (1, 0)."""
    if q < 0 or (q == 0 and p < 0):
        return (-p, -q)
    return (p, q)


def xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def completion(p: int, q: int) -> Mat:
    """A determinant-one matrix whose first column is the primitive vector (p, q)."""
    g, x, y = xgcd(p, q)
    if g != 1:
        raise ValueError(f"({p}, {q}) is not primitive")
    # p*x + q*y = 1  =>  [[p, -y], [q, x]] has determinant 1
    return matrix((p, -y, q, x))


def is_primitive(p: int, q: int) -> bool:
    return gcd(p, q) == 1
