import sys
from collections import deque
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor
from typing import Dict, List, Optional, Tuple

from app.core import sl2
from app.core.config import get_settings
from app.core.errors import HypothesisError
from app.core.logger import logger
from app.models.curves import (
    ClassificationKind,
    ClassificationResult,
    DistanceResult,
    MappingClass,
    Slope,
)
from app.models.quadratic import QuadraticIrrational


def _k_range(offset: int, step: int, box: int) -> Tuple[int, int]:
    """Integers k with |offset + k*step| <= box (step != 0)."""
    lo = Fraction(-box - offset, step)
    hi = Fraction(box - offset, step)
    if lo > hi:
        lo, hi = hi, lo
    return ceil(lo), floor(hi)


def _box_neighbors(p: int, q: int, box: int) -> List[sl2.Vec]:
    _, x, y = sl2.xgcd(p, q)
    # p*x + q*y = 1, so every (u, v) = (-y + k p, x + k q) has p*v - q*u = 1
    bounds = [_k_range(-y, p, box)] if p else []
    if q:
        bounds.append(_k_range(x, q, box))
    lo = max(b[0] for b in bounds)
    hi = min(b[1] for b in bounds)
    neighbors = []
    for k in range(lo, hi + 1):
        u, v = -y + k * p, x + k * q
        if abs(u) <= box and abs(v) <= box:
            neighbors.append(sl2.canonical_pair(u, v))
    return neighbors


@lru_cache(maxsize=8)
def _box_graph(box: int) -> Dict[sl2.Vec, Tuple[sl2.Vec, ...]]:
    graph = {}
    for q in range(0, box + 1):
        for p in range(-box, box + 1):
            if sl2.is_primitive(p, q) and (q > 0 or p == 1):
                graph[(p, q)] = tuple(_box_neighbors(p, q, box))
    return graph


class FareyService:
    """Curves and mapping classes of the once-punctured torus."""

    @staticmethod
    def canonical_slope(p: int, q: int) -> Slope:
        """
        Canonical representative of ±(p, q).

        Args:
            p: numerator
            q: denominator

        Returns:
            Slope with q > 0, or (1, 0)

        Raises:
            NotACurveError: if gcd(|p|, |q|) != 1
        """
        return Slope.of(p, q)

    @staticmethod
    def intersection(s1: Slope, s2: Slope) -> int:
        return abs(s1.p * s2.q - s2.p * s1.q)

    @staticmethod
    def apply(m: MappingClass, s: Slope) -> Slope:
        p, q = sl2.act(m.matrix, s.vector)
        return Slope.of(p, q)

    @staticmethod
    def twist_matrix(axis: Slope, n: int) -> MappingClass:
        """
        Right Dehn twist about `axis` raised to the n-th power.

        Args:
            axis: twist curve (p, q)
            n: nonzero power

        Returns:
            I + n·[[-pq, p²], [-q², pq]]
        """
        if n == 0:
            raise HypothesisError("twist power must be nonzero")
        p, q = axis.p, axis.q
        return MappingClass(a=1 - n * p * q, b=n * p * p, c=-n * q * q, d=1 + n * p * q)

    @staticmethod
    def is_pure(m: MappingClass) -> bool:
        return sl2.mod(m.matrix, 3) == sl2.IDENTITY_KEY

    @classmethod
    def classify(cls, m: MappingClass) -> ClassificationResult:
        """
        Trichotomy by |trace|: identity / finite order, Dehn twist, pseudo-Anosov.

        ±I count as the identity since they act trivially on curves.
        """
        t = m.trace
        if sl2.is_central(m.matrix):
            return ClassificationResult(kind=ClassificationKind.IDENTITY, trace=t, central_sign=m.a)
        if abs(t) < 2:
            return ClassificationResult(kind=ClassificationKind.FINITE_ORDER, trace=t)
        if abs(t) == 2:
            return cls._classify_twist(m)

        dilatation = QuadraticIrrational(abs(t), 1, 2, t * t - 4)
        return ClassificationResult(kind=ClassificationKind.PSEUDO_ANOSOV, trace=t, dilatation=dilatation)

    @classmethod
    def _classify_twist(cls, m: MappingClass) -> ClassificationResult:
        eps = 1 if m.trace > 0 else -1
        a, b, c, d = m.entries
        n0, n1, n2, n3 = a - eps, b, c, d - eps
        # kernel of M - eps*I
        v = (n1, -n0) if (n0, n1) != (0, 0) else (n3, -n2)
        g = sl2.xgcd(*v)[0]
        axis = Slope.of(v[0] // g, v[1] // g)
        p, q = axis.p, axis.q
        power = (eps * b) // (p * p) if p else -(eps * c) // (q * q)

        twist = cls.twist_matrix(axis, power)
        assert twist.entries == (m.entries if eps == 1 else sl2.key(-m.matrix)), "twist decomposition failed"
        return ClassificationResult(
            kind=ClassificationKind.DEHN_TWIST,
            trace=m.trace,
            axis=axis,
            power=power,
            central_sign=eps,
            reducing_system=[axis],
        )

    @staticmethod
    def fixed_points(m: MappingClass) -> Tuple[QuadraticIrrational, QuadraticIrrational]:
        """
        Attracting and repelling fixed points of a hyperbolic matrix on the projective line.

        Returns:
            (attracting, repelling) as exact quadratic irrationals
        """
        return _fixed_points(m.entries)

    @classmethod
    def farey_distance(cls, s1: Slope, s2: Slope, cap: Optional[int] = None) -> DistanceResult:
        """
        Farey graph distance via the continued fraction ladder between the endpoints.

        Moves s1 to 1/0 with a determinant-one matrix, then runs a breadth-first
        search over 1/0 and the convergents of the image of s2. A geodesic can
        always be found among those vertices.

        Args:
            s1: first slope
            s2: second slope
            cap: largest distance reported as a number

        Returns:
            DistanceResult with a witness path, or exceeds_cap set
        """
        cap = get_settings().DISTANCE_CAP if cap is None else cap
        if cap < 0:
            raise HypothesisError("cap must be non-negative")

        path = [Slope.of(*v) for v in _ladder_path(s1.vector, s2.vector)]
        distance = len(path) - 1

        if distance > cap:
            return DistanceResult(source=s1, target=s2, cap=cap, exceeds_cap=True)
        return DistanceResult(source=s1, target=s2, cap=cap, distance=distance, path=path)

    @staticmethod
    def ladder_distance(u: sl2.Vec, v: sl2.Vec) -> int:
        """Uncapped farey_distance on canonical primitive vectors, without building slopes."""
        return len(_ladder_path(u, v)) - 1

    @classmethod
    def farey_path(cls, s1: Slope, s2: Slope) -> List[Slope]:
        """A geodesic from s1 to s2; consecutive slopes intersect once."""
        result = cls.farey_distance(s1, s2, cap=sys.maxsize)
        return result.path

    @classmethod
    def brute_force_distance(cls, s1: Slope, s2: Slope, box: Optional[int] = None,
                             cap: Optional[int] = None) -> DistanceResult:
        """
        Breadth-first search over slopes with |p|, |q| <= box.

        This is the independent oracle for farey_distance.
        """
        settings = get_settings()
        box = settings.BRUTE_FORCE_BOX if box is None else box
        cap = settings.DISTANCE_CAP if cap is None else cap
        for s in (s1, s2):
            if abs(s.p) > box or abs(s.q) > box:
                raise HypothesisError(f"slope {s} lies outside the search box {box}")

        distances = cls.bounded_distances_from(s1, box)
        distance = distances.get(s2.vector)
        if distance is None or distance > cap:
            return DistanceResult(source=s1, target=s2, cap=cap, exceeds_cap=True, method="bounded_bfs")
        return DistanceResult(source=s1, target=s2, cap=cap, distance=distance, method="bounded_bfs")

    @staticmethod
    def bounded_distances_from(source: Slope, box: int) -> Dict[sl2.Vec, int]:
        graph = _box_graph(box)
        distances = {source.vector: 0}
        queue = deque([source.vector])
        while queue:
            v = queue.popleft()
            for w in graph[v]:
                if w not in distances:
                    distances[w] = distances[v] + 1
                    queue.append(w)
        return distances

    @classmethod
    def translation_estimate(cls, m: MappingClass, s: Slope, n: int, cap: Optional[int] = None) -> Fraction:
        """
        Empirical translation d(Mⁿ(s), s)/n of a pseudo-Anosov on the Farey graph.
        """
        if cls.classify(m).kind != ClassificationKind.PSEUDO_ANOSOV:
            raise HypothesisError(f"{m} is not pseudo-Anosov")
        if n < 1:
            raise HypothesisError("n must be at least 1")
        result = cls.farey_distance(cls.apply(m.power(n), s), s, cap)
        if result.exceeds_cap:
            raise HypothesisError(f"distance exceeds cap {result.cap}")
        return Fraction(result.distance, n)

    @classmethod
    def translation_table(cls, m: MappingClass, s: Slope, max_n: int) -> List[Fraction]:
        """Estimates for n = 1..max_n; their minimum bounds c from above on this sample."""
        estimates = [cls.translation_estimate(m, s, n) for n in range(1, max_n + 1)]
        logger.info(f"Translation estimates for {m}: min {min(estimates)} over n <= {max_n}",
                    extra={"operation": "translation_estimate"})
        return estimates


@lru_cache(maxsize=1024)
def _fixed_points(m: sl2.Key) -> Tuple[QuadraticIrrational, QuadraticIrrational]:
    a, b, c, d = m
    t = a + d
    if abs(t) <= 2:
        raise HypothesisError(f"[[{a},{b}],[{c},{d}]] is not hyperbolic")
    discriminant = t * t - 4
    # roots of c x² + (d - a) x - b; c != 0 since |t| > 2
    plus = QuadraticIrrational(a - d, 1, 2 * c, discriminant)
    minus = QuadraticIrrational(a - d, -1, 2 * c, discriminant)
    # c x + d is the eigenvalue (t ± √Δ)/2; attracting when its modulus exceeds 1
    return (plus, minus) if t > 0 else (minus, plus)


def _ladder_path(source: sl2.Vec, target: sl2.Vec) -> List[sl2.Vec]:
    g = sl2.completion(*source)
    image = sl2.canonical_pair(*sl2.act(sl2.inv(g), target))
    ladder = [(1, 0)] + _convergents(*image)
    return [sl2.canonical_pair(*sl2.act(g, v)) for v in _bfs_path(ladder, (1, 0), image)]


def _convergents(p: int, q: int) -> List[sl2.Vec]:
    """Convergents of p/q (q > 0) from the floor continued fraction."""
    convergents = []
    h_prev, k_prev = 0, 1
    h, k = 1, 0
    while q:
        a, r = divmod(p, q)
        h, h_prev = a * h + h_prev, h
        k, k_prev = a * k + k_prev, k
        convergents.append((h, k))
        p, q = q, r
    return convergents


def _bfs_path(vertices: List[sl2.Vec], source: sl2.Vec, target: sl2.Vec) -> List[sl2.Vec]:
    if source == target:
        return [source]
    parents = {source: None}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in vertices:
            if w not in parents and abs(v[0] * w[1] - v[1] * w[0]) == 1:
                parents[w] = v
                if w == target:
                    path = [w]
                    while parents[path[-1]] is not None:
                        path.append(parents[path[-1]])
                    return path[::-1]
                queue.append(w)
    raise AssertionError(f"ladder does not connect {source} to {target}")
