import os
import sys
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.errors import HypothesisError, NotIndependentError
from app.models.certificate import CertificateKind, FreeCertificate
from app.models.curves import Slope
from app.models.twist import Membership, PingPongSets, TwistFactor, TwistWord
from app.services.free_cert_service import FreeCertService
from app.services.twist_service import TwistService

X, Y, DIAGONAL = Slope.of(1, 0), Slope.of(0, 1), Slope.of(1, 1)

slopes = (
    st.tuples(st.integers(-100, 100), st.integers(-100, 100))
    .filter(lambda v: gcd(*v) == 1)
    .map(lambda v: Slope.of(*v))
)
powers = st.integers(-20, 20).filter(lambda n: n != 0)


def test_twist_inequality_examples():
    report = TwistService.twist_inequality_check(TwistWord.single(X, 1), Y, Y)
    assert (report.lhs, report.rhs, report.holds) == (1, -1, True)

    report = TwistService.twist_inequality_check(TwistWord.single(X, 5), Y, X)
    assert (report.lhs, report.rhs, report.holds) == (1, -1, True)

    report = TwistService.twist_inequality_check(TwistWord.single(Y, 4), X, X)
    assert (report.lhs, report.rhs, report.holds) == (4, 2, True)


def test_strict_inequality_drops_the_offset():
    report = TwistService.twist_inequality_check(TwistWord.single(Y, 4), X, X, strict=True)
    assert report.rhs == 4 and report.holds


def test_twist_word_collapses_to_one_axis():
    word = TwistWord(factors=[TwistFactor(axis=X, power=3), TwistFactor(axis=X, power=2)])
    assert (word.axis, word.power) == (X, 5)
    with pytest.raises(ValidationError):
        TwistWord(factors=[TwistFactor(axis=X, power=3), TwistFactor(axis=Y, power=2)])
    with pytest.raises(ValidationError):
        TwistWord(factors=[TwistFactor(axis=X, power=3), TwistFactor(axis=X, power=-3)])
    with pytest.raises(HypothesisError):
        TwistWord.single(X, 0)


def test_pingpong_membership():
    sets = PingPongSets(alpha=X, beta=Y)
    assert TwistService.pingpong_membership(sets, X) == Membership.IN_XA
    assert TwistService.pingpong_membership(sets, Y) == Membership.IN_XB
    assert TwistService.pingpong_membership(sets, DIAGONAL) == Membership.NEITHER


def test_verify_twist_pingpong_certificate():
    result = TwistService.verify_twist_pingpong(TwistWord.single(Y, 4), TwistWord.single(X, 4),
                                                TwistService.slope_box(5), [1, -1, 2, -2, 3, -3])
    assert isinstance(result, FreeCertificate)
    assert result.kind == CertificateKind.TWIST_PINGPONG and result.is_proof
    assert all(step["holds"] for step in result.parameters["chain"])
    assert result.parameters["orbit_checks"] > 0


def test_verify_twist_pingpong_errors():
    with pytest.raises(NotIndependentError) as e:
        TwistService.verify_twist_pingpong(TwistWord.single(X, 4), TwistWord.single(X, 7))
    assert "not independent" in str(e.value)
    with pytest.raises(HypothesisError) as e:
        TwistService.verify_twist_pingpong(TwistWord.single(Y, 3), TwistWord.single(X, 4))
    assert "hypothesis violated" in str(e.value)


def test_certified_twist_pairs_have_no_short_relation():
    pairs = [((X, 4), (Y, -4)), ((DIAGONAL, 6), (Slope.of(-1, 2), 5)), ((Slope.of(2, 3), -4), (Y, 4))]
    for (alpha, k), (beta, l) in pairs:
        a, b = TwistWord.single(alpha, k), TwistWord.single(beta, l)
        assert isinstance(TwistService.verify_twist_pingpong(a, b, TwistService.slope_box(3)), FreeCertificate)
        assert FreeCertService.relation_oracle(TwistService.word_matrix(a), TwistService.word_matrix(b), 8) is None


@settings(max_examples=500, deadline=None)
@given(slopes, powers, slopes, slopes)
def test_twist_inequality_holds(axis, power, delta, delta_prime):
    report = TwistService.twist_inequality_check(TwistWord.single(axis, power), delta, delta_prime)
    assert report.holds, (report.lhs, report.rhs)


@settings(max_examples=300, deadline=None)
@given(slopes, st.integers(1, 20), slopes, slopes)
def test_strict_twist_inequality_holds(axis, power, delta, delta_prime):
    report = TwistService.twist_inequality_check(TwistWord.single(axis, power), delta, delta_prime, strict=True)
    assert report.holds, (report.lhs, report.rhs)


def test_fuzz_twist_inequality():
    report = TwistService.fuzz_twist_inequality(instances=10_000, max_power=20, max_entry=100, seed=1)
    assert report.instances == 10_000
    assert report.violations == 0, report.first_violation


def test_fuzz_strict_variant():
    report = TwistService.fuzz_twist_inequality(instances=2_000, seed=2, strict=True)
    assert report.violations == 0


def test_fuzz_is_reproducible():
    first = TwistService.fuzz_twist_inequality(instances=200, seed=5)
    second = TwistService.fuzz_twist_inequality(instances=200, seed=5)
    assert first == second


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
