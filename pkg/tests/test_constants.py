import math
import os
import sys
from fractions import Fraction

import pytest
from pydantic import ValidationError

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.errors import HypothesisError
from app.models.constants import BoundaryPlacement, ComponentKind, ProjectionParams
from app.services.constants_service import ConstantsService

UNIT = ProjectionParams(c=Fraction(1))


def test_fact2_lower():
    assert ConstantsService.fact2_lower(10) == 16
    assert ConstantsService.fact2_lower(2) == 1
    assert ConstantsService.fact2_lower(6) == 4
    assert ConstantsService.fact2_lower(9) == 8
    with pytest.raises(HypothesisError):
        ConstantsService.fact2_lower(1)


def test_fact3_arcs_lower():
    assert ConstantsService.fact3_arcs_lower(16) == Fraction(7, 2)
    assert ConstantsService.fact3_arcs_lower(2) == 0
    assert ConstantsService.fact3_arcs_lower(14) == 3


def test_behrstock_threshold_check():
    report = ConstantsService.behrstock_threshold_check(10)
    assert (report.iuv_min, report.arcs_min, report.implies_D_out_4) == (16, Fraction(7, 2), True)

    report = ConstantsService.behrstock_threshold_check(8)
    assert (report.iuv_min, report.arcs_min, report.implies_D_out_4) == (8, Fraction(3, 2), False)

    report = ConstantsService.behrstock_threshold_check(9)
    assert report.iuv_min == 8 and report.exponent_floored and not report.implies_D_out_4


def test_behrstock_threshold_is_monotone():
    verdicts = [ConstantsService.behrstock_threshold_check(d).implies_D_out_4 for d in range(2, 60)]
    first = verdicts.index(True)
    assert all(verdicts[first:])


def test_p1_constant():
    assert ConstantsService.p1_constant([1]) == 14
    assert ConstantsService.p1_constant([2]) == 7
    assert ConstantsService.p1_constant([10, 14]) == 2
    with pytest.raises(HypothesisError):
        ConstantsService.p1_constant([])
    with pytest.raises(HypothesisError):
        ConstantsService.p1_constant([0])


def test_p1_constant_closes_the_chain():
    for c in (Fraction(1), Fraction(1, 2), Fraction(3), Fraction(10), Fraction(14), Fraction(7, 3)):
        p = math.ceil(ConstantsService.p1_constant([c])) + 1
        assert ConstantsService.chain_verify(ProjectionParams(c=c), p, 1).accepted


def test_main_lemma_power():
    assert ConstantsService.main_lemma_power([1], 0) == 15
    assert ConstantsService.main_lemma_power([2], 20) == 21
    assert ConstantsService.main_lemma_power([10, 14], 0) == 5


def test_chain_verify_examples():
    chain = ConstantsService.chain_verify(UNIT, 14, 1)
    assert chain.accepted and chain.failing_step is None
    assert [s.name for s in chain.steps] == ["behrstock", "translation", "triangle"]

    chain = ConstantsService.chain_verify(UNIT, 13, 1)
    assert not chain.accepted and chain.failing_step == "translation"
    failing = chain.steps[1]
    assert (failing.lhs, failing.rhs) == (13, 14)

    assert ConstantsService.chain_verify(ProjectionParams(c=Fraction(1, 2)), 28, 1).accepted


def test_chain_verify_monotone_in_m():
    for m in (1, -1, 2, -3, 5):
        assert ConstantsService.chain_verify(UNIT, 14, m).accepted
    assert ConstantsService.chain_verify(UNIT, 7, 2).accepted
    assert not ConstantsService.chain_verify(UNIT, 7, 1).accepted


def test_chain_verify_rejects_bad_input():
    with pytest.raises(HypothesisError):
        ConstantsService.chain_verify(UNIT, 14, 0)
    with pytest.raises(HypothesisError):
        ConstantsService.chain_verify(UNIT, 0, 1)


def test_projection_params_validation():
    with pytest.raises(ValidationError):
        ProjectionParams(c=Fraction(0))
    with pytest.raises(ValidationError):
        ProjectionParams(c=Fraction(1), D_in=4, D_out=4)


def test_threshold_search():
    search = ConstantsService.threshold_search()
    assert (search.D_in_min, search.sum_min) == (10, 14)
    assert search.monotone_above and search.cap == 100


def test_threshold_search_tracks_additive_constant():
    for additive in (0, 1, 2, 4, 6, 10, 20):
        search = ConstantsService.threshold_search(additive=additive)
        assert search.D_in_min == 2 + 2 * math.ceil(math.log2(12 + additive))
        assert search.sum_min == search.D_in_min + 4


def test_simulate_relpa_pingpong():
    trace = ConstantsService.simulate_relpa_pingpong(UNIT, 14, 20, seed=0)
    assert trace.passed
    assert len(trace.states) == 21
    assert [s.region for s in trace.states[:3]] == ["X_a", "X_b", "X_a"]


def test_simulate_relpa_pingpong_many_seeds():
    for seed in range(10):
        assert ConstantsService.simulate_relpa_pingpong(UNIT, 14, 20, seed=seed).passed


def test_simulate_relpa_pingpong_edges():
    with pytest.raises(HypothesisError):
        ConstantsService.simulate_relpa_pingpong(UNIT, 13, 20)
    trace = ConstantsService.simulate_relpa_pingpong(UNIT, 14, 0)
    assert trace.passed and len(trace.states) == 1


def test_relpa_dispatch_cases():
    result = ConstantsService.relpa_dispatch(ComponentKind.PSEUDO_ANOSOV, None, None, UNIT, 15)
    assert result.case == "1" and result.accepted

    result = ConstantsService.relpa_dispatch(ComponentKind.REDUCIBLE, BoundaryPlacement.IDENTITY_COMPONENTS,
                                             None, UNIT, 15)
    assert result.case == "2" and result.subgroup == "⟨a^k, b^k a^k b^-k⟩"

    result = ConstantsService.relpa_dispatch(ComponentKind.REDUCIBLE, BoundaryPlacement.PA_COMPONENT,
                                             BoundaryPlacement.IDENTITY_COMPONENTS, UNIT, 15)
    assert result.case.startswith("3") and result.subgroup == "⟨b^k, a^k b^k a^-k⟩"

    result = ConstantsService.relpa_dispatch(ComponentKind.REDUCIBLE, BoundaryPlacement.PA_COMPONENT,
                                             BoundaryPlacement.PA_COMPONENT, UNIT, 15)
    assert result.subgroup == "⟨a^k, b^k⟩" and result.accepted


def test_relpa_dispatch_power_must_exceed_p1():
    result = ConstantsService.relpa_dispatch(ComponentKind.PSEUDO_ANOSOV, None, None, UNIT, 14)
    assert not result.accepted
    assert result.inequalities[0].name == "power" and not result.inequalities[0].holds


def test_relpa_dispatch_missing_placement():
    with pytest.raises(HypothesisError):
        ConstantsService.relpa_dispatch(ComponentKind.REDUCIBLE, None, None, UNIT, 15)
    with pytest.raises(HypothesisError):
        ConstantsService.relpa_dispatch(ComponentKind.REDUCIBLE, BoundaryPlacement.PA_COMPONENT, None, UNIT, 15)


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
