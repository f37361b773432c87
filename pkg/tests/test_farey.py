import os
import random
import sys
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core import sl2
from app.core.errors import HypothesisError, NotACurveError, ParseError
from app.models.curves import ClassificationKind, MappingClass, Slope, parse_generators, parse_matrix, parse_slope
from app.models.quadratic import QuadraticIrrational
from app.services.farey_service import FareyService
from app.services.twist_service import TwistService

GOLDEN = MappingClass(a=2, b=1, c=1, d=1)

slopes = (
    st.tuples(st.integers(-30, 30), st.integers(-30, 30))
    .filter(lambda v: gcd(*v) == 1)
    .map(lambda v: Slope.of(*v))
)
moves = st.sampled_from([GOLDEN, MappingClass(a=1, b=1, c=0, d=1), MappingClass(a=0, b=-1, c=1, d=0),
                         MappingClass(a=1, b=0, c=-3, d=1)])


def test_sl2_matrix_arithmetic():
    m = GOLDEN.matrix
    assert sl2.key(m) == (2, 1, 1, 1)
    assert sl2.key(m * sl2.inv(m)) == sl2.IDENTITY_KEY
    assert sl2.key(sl2.power(m, -2)) == (2, -3, -3, 5)
    assert sl2.key(sl2.power(m, 0)) == sl2.IDENTITY_KEY
    assert sl2.det(sl2.product([m, m, sl2.inv(m)])) == 1
    assert sl2.act(m, (1, 0)) == (2, 1)
    assert sl2.mod(sl2.matrix((4, -3, 3, -2)), 3) == (1, 0, 0, 1)
    assert sl2.is_central(-sl2.identity()) and not sl2.is_central(m)
    assert sl2.key(sl2.completion(5, 3))[::2] == (5, 3)
    assert GOLDEN.projectively_equal(MappingClass.from_matrix(-m))


def test_canonical_slope():
    assert FareyService.canonical_slope(3, -2) == Slope(p=-3, q=2)
    assert FareyService.canonical_slope(1, 0) == Slope(p=1, q=0)
    assert FareyService.canonical_slope(-1, 0) == Slope(p=1, q=0)
    with pytest.raises(NotACurveError):
        FareyService.canonical_slope(2, 4)


def test_parse_inputs():
    assert Slope.parse("-3/2") == Slope(p=-3, q=2)
    assert MappingClass.parse("[[2,1],[1,1]]") == GOLDEN
    assert MappingClass.parse("2 1 1 1") == GOLDEN
    assert len(parse_generators("[[1,2],[0,1]]; [[1,0],[2,1]]")) == 2
    with pytest.raises(ParseError) as e:
        MappingClass.parse("[[2,x],[1,1]]")
    assert "x" in e.value.token
    with pytest.raises(HypothesisError):
        MappingClass.parse("[[2,0],[0,1]]")


def test_intersection():
    i = FareyService.intersection
    assert i(Slope.of(1, 0), Slope.of(0, 1)) == 1
    assert i(Slope.of(1, 0), Slope.of(1, 0)) == 0
    assert i(Slope.of(2, 3), Slope.of(1, 1)) == 1


def test_apply():
    s = Slope.of(5, 7)
    assert FareyService.apply(MappingClass.identity(), s) == s
    assert FareyService.apply(MappingClass(a=1, b=1, c=0, d=1), Slope.of(0, 1)) == Slope.of(1, 1)
    assert FareyService.apply(GOLDEN, Slope.of(1, 0)) == Slope.of(2, 1)


def test_classify():
    twist = FareyService.classify(MappingClass(a=1, b=1, c=0, d=1))
    assert twist.kind == ClassificationKind.DEHN_TWIST
    assert twist.axis == Slope.of(1, 0) and twist.power == 1
    assert twist.reducing_system == [Slope.of(1, 0)]

    anosov = FareyService.classify(GOLDEN)
    assert anosov.kind == ClassificationKind.PSEUDO_ANOSOV
    assert anosov.dilatation == QuadraticIrrational(3, 1, 2, 5)
    assert str(anosov.dilatation) == "(3+√5)/2"

    assert FareyService.classify(MappingClass(a=0, b=-1, c=1, d=0)).kind == ClassificationKind.FINITE_ORDER
    minus = FareyService.classify(MappingClass(a=-1, b=0, c=0, d=-1))
    assert minus.kind == ClassificationKind.IDENTITY and minus.central_sign == -1


def test_classify_negative_twist():
    # -T_(1,1)^3
    m = FareyService.twist_matrix(Slope.of(1, 1), 3)
    result = FareyService.classify(MappingClass.from_matrix(-m.matrix))
    assert result.kind == ClassificationKind.DEHN_TWIST
    assert (result.axis, result.power, result.central_sign) == (Slope.of(1, 1), 3, -1)


def test_twist_matrix():
    assert FareyService.twist_matrix(Slope.of(1, 0), 4) == MappingClass(a=1, b=4, c=0, d=1)
    assert FareyService.twist_matrix(Slope.of(0, 1), 4) == MappingClass(a=1, b=0, c=-4, d=1)
    t = FareyService.twist_matrix(Slope.of(1, 1), 1)
    assert t == MappingClass(a=0, b=1, c=-1, d=2)
    assert FareyService.apply(t, Slope.of(1, 1)) == Slope.of(1, 1)
    with pytest.raises(HypothesisError):
        FareyService.twist_matrix(Slope.of(1, 1), 0)


def test_twist_classification_roundtrip():
    for axis in TwistService.slope_box(4):
        for n in (-5, -1, 2, 7):
            result = FareyService.classify(FareyService.twist_matrix(axis, n))
            assert (result.axis, result.power, result.central_sign) == (axis, n, 1)


def test_is_pure():
    assert FareyService.is_pure(MappingClass.identity())
    assert FareyService.is_pure(MappingClass(a=1, b=3, c=0, d=1))
    assert not FareyService.is_pure(MappingClass(a=1, b=1, c=0, d=1))


def test_fixed_points():
    attracting, repelling = FareyService.fixed_points(GOLDEN)
    assert attracting == QuadraticIrrational(1, 1, 2, 5)
    assert repelling == QuadraticIrrational(1, -1, 2, 5)
    # negative trace swaps the roles
    attracting, repelling = FareyService.fixed_points(MappingClass(a=-2, b=-1, c=-1, d=-1))
    assert attracting == QuadraticIrrational(1, 1, 2, 5)
    with pytest.raises(HypothesisError):
        FareyService.fixed_points(MappingClass(a=1, b=1, c=0, d=1))


def test_distance_examples():
    d = FareyService.farey_distance
    assert d(Slope.of(0, 1), Slope.of(1, 0)).distance == 1
    assert d(Slope.of(3, 7), Slope.of(3, 7)).distance == 0
    result = d(Slope.of(0, 1), Slope.of(5, 2))
    assert result.distance == 3
    assert result.path[0] == Slope.of(0, 1) and result.path[-1] == Slope.of(5, 2)
    for u, v in zip(result.path, result.path[1:]):
        assert FareyService.intersection(u, v) == 1


def test_farey_path():
    path = FareyService.farey_path(Slope.of(2, 5), Slope.of(-7, 3))
    assert path[0] == Slope.of(2, 5) and path[-1] == Slope.of(-7, 3)
    assert len(path) - 1 == FareyService.farey_distance(Slope.of(2, 5), Slope.of(-7, 3)).distance
    assert all(FareyService.intersection(u, v) == 1 for u, v in zip(path, path[1:]))
    assert FareyService.farey_path(Slope.of(1, 0), Slope.of(1, 0)) == [Slope.of(1, 0)]


def test_parse_helpers():
    assert parse_slope("-1/2") == Slope.of(1, -2)
    with pytest.raises(NotACurveError):
        parse_slope("2/6")
    assert parse_matrix("0 -1 1 0") == MappingClass(a=0, b=-1, c=1, d=0)
    with pytest.raises(ParseError):
        parse_slope("1/2/3")


def test_distance_cap():
    result = FareyService.farey_distance(Slope.of(0, 1), Slope.of(5, 2), cap=2)
    assert result.exceeds_cap and result.distance is None


def test_distance_matches_bfs_full_box():
    box = 30
    slopes = [s.vector for s in TwistService.slope_box(box)]
    for i, source in enumerate(slopes):
        oracle = FareyService.bounded_distances_from(Slope.of(*source), box)
        assert len(oracle) == len(slopes)
        for target in slopes[i:]:
            assert FareyService.ladder_distance(source, target) == oracle[target], (source, target)


def test_distance_matches_bfs_sampled():
    rng = random.Random(7)
    slopes = TwistService.slope_box(30)
    for _ in range(40):
        s1, s2 = rng.sample(slopes, 2)
        assert FareyService.farey_distance(s1, s2).distance == FareyService.brute_force_distance(s1, s2, 30).distance


@settings(max_examples=200, deadline=None)
@given(slopes, slopes, slopes)
def test_distance_is_a_metric(x, y, z):
    d = lambda u, v: FareyService.farey_distance(u, v).distance
    assert (d(x, y) == 0) == (x == y)
    assert d(x, y) == d(y, x)
    assert d(x, z) <= d(x, y) + d(y, z)
    assert (d(x, y) == 1) == (FareyService.intersection(x, y) == 1)


@settings(max_examples=200, deadline=None)
@given(slopes, slopes, moves)
def test_distance_isometry(x, y, m):
    d = lambda u, v: FareyService.farey_distance(u, v).distance
    assert d(FareyService.apply(m, x), FareyService.apply(m, y)) == d(x, y)
    assert d(FareyService.apply(m.inverse(), x), FareyService.apply(m.inverse(), y)) == d(x, y)


def test_translation_estimate():
    assert FareyService.translation_estimate(GOLDEN, Slope.of(1, 0), 1) == 1
    m4 = GOLDEN.power(4)
    assert m4 == MappingClass(a=34, b=21, c=21, d=13)
    expected = FareyService.brute_force_distance(Slope.of(34, 21), Slope.of(1, 0), 40).distance
    assert FareyService.translation_estimate(GOLDEN, Slope.of(1, 0), 4) == Fraction(expected, 4)
    with pytest.raises(HypothesisError):
        FareyService.translation_estimate(MappingClass(a=1, b=1, c=0, d=1), Slope.of(1, 0), 2)
    table = FareyService.translation_table(GOLDEN, Slope.of(0, 1), 6)
    assert all(t > 0 for t in table)


def main():
    """Run every test in this module and print a summary."""
    tests = [f for name, f in sorted(globals().items()) if name.startswith("test_") and callable(f)]
    failures = 0
    for test in tests:
        try:
            test()
            print(f"✅ {test.__name__}")
        except Exception as e:
            failures += 1
            print(f"❌ {test.__name__}: {e!r}")
    print(f"\n{len(tests) - failures}/{len(tests)} tests passed")
    return failures


if __name__ == "__main__":
    sys.exit(main())
