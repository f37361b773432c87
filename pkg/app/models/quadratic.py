from __future__ import annotations

from decimal import Decimal, localcontext
from fractions import Fraction
from functools import total_ordering
from math import gcd, isqrt
from typing import Annotated, Any, Dict, Union

from pydantic import BeforeValidator, PlainSerializer
from sympy.ntheory.factor_ import core

Number = Union[int, Fraction, "QuadraticIrrational"]

DECIMAL_DIGITS = 30


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


@total_ordering
class QuadraticIrrational:
    """Exact number (a + b√D)/c in canonical form.

    Canonical: c > 0, D squarefree (D = 0 and b = 0 for rationals),
    gcd(a, b, c) = 1.
    """

    __slots__ = ("_a", "_b", "_c", "_d")

    def __init__(self, a: int, b: int = 0, c: int = 1, D: int = 0) -> None:
        if c == 0:
            raise ZeroDivisionError("denominator is zero")
        if D < 0:
            raise ValueError("negative radicand")
        if b != 0 and D > 1:
            free = int(core(D, 2))
            b *= isqrt(D // free)
            D = free
        if D == 1:
            a, b, D = a + b, 0, 0
        if b == 0 or D == 0:
            b, D = 0, 0
        if c < 0:
            a, b, c = -a, -b, -c
        g = gcd(gcd(a, b), c)
        self._a, self._b, self._c, self._d = a // g, b // g, c // g, D

    @property
    def a(self) -> int:
        return self._a

    @property
    def b(self) -> int:
        return self._b

    @property
    def c(self) -> int:
        return self._c

    @property
    def D(self) -> int:
        return self._d

    @property
    def is_rational(self) -> bool:
        return self._b == 0

    @classmethod
    def from_rational(cls, x: Union[int, Fraction]) -> QuadraticIrrational:
        x = Fraction(x)
        return cls(x.numerator, 0, x.denominator, 0)

    @classmethod
    def sqrt(cls, n: Union[int, Fraction]) -> QuadraticIrrational:
        n = Fraction(n)
        # √(p/q) = √(pq)/q
        return cls(0, 1, n.denominator, n.numerator * n.denominator)

    @classmethod
    def _coerce(cls, other: Any) -> QuadraticIrrational:
        if isinstance(other, QuadraticIrrational):
            return other
        if isinstance(other, (int, Fraction)):
            return cls.from_rational(other)
        raise TypeError(f"cannot combine QuadraticIrrational with {type(other).__name__}")

    def _common_radicand(self, other: QuadraticIrrational) -> int:
        if self._d and other._d and self._d != other._d:
            raise ValueError(f"radicands differ: √{self._d} and √{other._d}")
        return self._d or other._d

    def __repr__(self) -> str:
        return f"QuadraticIrrational({self._a}, {self._b}, {self._c}, {self._d})"

    def __str__(self) -> str:
        if self.is_rational:
            return str(Fraction(self._a, self._c))
        root = f"√{self._d}" if abs(self._b) == 1 else f"{abs(self._b)}√{self._d}"
        if self._a == 0:
            body = root if self._b > 0 else f"-{root}"
        else:
            body = f"{self._a}{'+' if self._b > 0 else '-'}{root}"
        if self._c == 1:
            return body
        return f"({body})/{self._c}" if self._a != 0 else f"{body}/{self._c}"

    def __hash__(self) -> int:
        return hash((self._a, self._b, self._c, self._d))

    def __eq__(self, other: object) -> bool:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return (self._a, self._b, self._c, self._d) == (other._a, other._b, other._c, other._d)

    def __lt__(self, other: Number) -> bool:
        return (self - other).sign() < 0

    def __neg__(self) -> QuadraticIrrational:
        return QuadraticIrrational(-self._a, -self._b, self._c, self._d)

    def __add__(self, other: Number) -> QuadraticIrrational:
        other = self._coerce(other)
        D = self._common_radicand(other)
        return QuadraticIrrational(
            self._a * other._c + other._a * self._c,
            self._b * other._c + other._b * self._c,
            self._c * other._c,
            D,
        )

    __radd__ = __add__

    def __sub__(self, other: Number) -> QuadraticIrrational:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Number) -> QuadraticIrrational:
        return self._coerce(other) - self

    def __mul__(self, other: Number) -> QuadraticIrrational:
        other = self._coerce(other)
        D = self._common_radicand(other)
        return QuadraticIrrational(
            self._a * other._a + self._b * other._b * D,
            self._a * other._b + self._b * other._a,
            self._c * other._c,
            D,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> QuadraticIrrational:
        norm = self._a * self._a - self._b * self._b * self._d
        if norm == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return QuadraticIrrational(self._c * self._a, -self._c * self._b, norm, self._d)

    def __truediv__(self, other: Number) -> QuadraticIrrational:
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other: Number) -> QuadraticIrrational:
        return self._coerce(other) * self.reciprocal()

    def conjugate(self) -> QuadraticIrrational:
        return QuadraticIrrational(self._a, -self._b, self._c, self._d)

    def sign(self) -> int:
        a, b = self._a, self._b
        if b == 0:
            return _sign(a)
        if a >= 0 and b > 0:
            return 1
        if a <= 0 and b < 0:
            return -1
        # opposite signs: compare a² with b²D
        if a * a > b * b * self._d:
            return _sign(a)
        return _sign(b)

    def floor(self) -> int:
        a, b, c = self._a, self._b, self._c
        if b == 0:
            return a // c
        m = b * b * self._d
        r = isqrt(m)
        if r * r == m:
            numerator_floor = a + r if b > 0 else a - r
        else:
            numerator_floor = a + r if b > 0 else a - r - 1
        # floor(y / c) = floor(floor(y) / c) for integer c > 0
        return numerator_floor // c

    def approximate(self, scale: int = 10 ** 40) -> Fraction:
        root = isqrt(self._b * self._b * self._d * scale * scale)
        root = root if self._b >= 0 else -root
        return Fraction(self._a * scale + root, self._c * scale)

    def __float__(self) -> float:
        return float(self.approximate())

    def decimal(self, digits: int = DECIMAL_DIGITS) -> str:
        with localcontext() as ctx:
            ctx.prec = digits + 10
            value = (Decimal(self._a) + Decimal(self._b) * Decimal(self._d).sqrt()) / Decimal(self._c)
            return format(value, f".{digits}g")

    def to_json(self) -> Dict[str, str]:
        return {
            "a": str(self._a),
            "b": str(self._b),
            "c": str(self._c),
            "D": str(self._d),
            "decimal": self.decimal(),
        }


def to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, dict):
        return Fraction(int(value["num"]), int(value["den"]))
    if isinstance(value, float):
        raise ValueError("floats are not exact rationals")
    return Fraction(value)


def rational_json(value: Fraction) -> Dict[str, str]:
    return {"num": str(value.numerator), "den": str(value.denominator)}


def to_quadratic(value: Any) -> QuadraticIrrational:
    if isinstance(value, QuadraticIrrational):
        return value
    if isinstance(value, dict):
        return QuadraticIrrational(int(value["a"]), int(value["b"]), int(value["c"]), int(value["D"]))
    return QuadraticIrrational.from_rational(to_fraction(value))


ExactRational = Annotated[
    Fraction,
    BeforeValidator(to_fraction),
    PlainSerializer(rational_json, return_type=dict),
]

ExactQuadratic = Annotated[
    QuadraticIrrational,
    BeforeValidator(to_quadratic),
    PlainSerializer(lambda q: q.to_json(), return_type=dict),
]
