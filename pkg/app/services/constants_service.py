import math
import random
from fractions import Fraction
from typing import List, Optional, Union

from app.core.errors import HypothesisError
from app.core.logger import logger
from app.models.constants import (
    BehrstockReport,
    BoundaryPlacement,
    ChainStep,
    ComponentKind,
    ConstantChain,
    ProjectionParams,
    RelPADispatch,
    SimulationTrace,
    ThresholdSearch,
    TokenState,
    step,
)

Rational = Union[int, Fraction]

# Fact 1: a curve crossing a subsurface boundary projects within 4 of it
FACT1_BOUND = 4
# "intersected thrice"
ARC_THRESHOLD = 3
FACT3_ADDITIVE = 2
FACT3_MULTIPLIER = 4
MAIN_LEMMA_FLOOR = 4


class ConstantsService:
    """Arithmetic skeleton of the Behrstock and relative pseudo-Anosov arguments.

    Projection distances are parameters here; nothing in this service looks at
    actual curves.
    """

    @staticmethod
    def fact2_lower(d: int) -> int:
        """2^((d-2)/2), with the exponent floored for odd d."""
        if d < 2:
            raise HypothesisError("distance must be at least 2")
        return 2 ** ((d - 2) // 2)

    @staticmethod
    def fact3_arcs_lower(iuv: int, additive: int = FACT3_ADDITIVE, multiplier: int = FACT3_MULTIPLIER) -> Fraction:
        """Inverts i(u,v) <= additive + multiplier·i(a_u,a_v)."""
        if iuv < 0:
            raise HypothesisError("intersection number must be non-negative")
        if multiplier < 1:
            raise HypothesisError("multiplier must be positive")
        return Fraction(iuv - additive, multiplier)

    @classmethod
    def behrstock_threshold_check(cls, D_in: int, additive: int = FACT3_ADDITIVE,
                                  multiplier: int = FACT3_MULTIPLIER) -> BehrstockReport:
        iuv = cls.fact2_lower(D_in)
        arcs = cls.fact3_arcs_lower(iuv, additive, multiplier)
        return BehrstockReport(
            D_in=D_in,
            iuv_min=iuv,
            exponent_floored=D_in % 2 == 1,
            arcs_min=arcs,
            additive=additive,
            multiplier=multiplier,
            implies_D_out_4=arcs >= ARC_THRESHOLD,
        )

    @staticmethod
    def p1_constant(c_values: List[Rational]) -> Fraction:
        """max({14/c} ∪ {2})."""
        if not c_values:
            raise HypothesisError("need at least one translation constant")
        values = [Fraction(c) for c in c_values]
        if any(c <= 0 for c in values):
            raise HypothesisError("translation constants must be positive")
        return max([Fraction(14) / c for c in values] + [Fraction(2)])

    @classmethod
    def main_lemma_power(cls, c_values: List[Rational], p0: Rational) -> int:
        """Least integer p > max{4, p₁, p₀}."""
        bound = max(Fraction(MAIN_LEMMA_FLOOR), cls.p1_constant(c_values), Fraction(p0))
        return math.floor(bound) + 1

    @classmethod
    def chain_verify(cls, params: ProjectionParams, p: int, m: int,
                     additive: int = FACT3_ADDITIVE, multiplier: int = FACT3_MULTIPLIER) -> ConstantChain:
        """
        The three exact comparisons that make b^(mp) send X_a into X_b.

        (i) D_in forces d <= 4 on the overlapping subsurface, and D_out >= 4;
        (ii) translation c·p·|m| >= D_in + D_out;
        (iii) triangle c·p·|m| - D_out >= D_in.

        Returns:
            ConstantChain; accepted only if every step holds, else failing_step names
            the first one that does not
        """
        if m == 0:
            raise HypothesisError("m must be nonzero")
        if p < 1:
            raise HypothesisError("p must be at least 1")
        report = cls.behrstock_threshold_check(params.D_in, additive, multiplier)
        translation = params.c * p * abs(m)
        steps = [
            step("behrstock",
                 f"({report.iuv_min} - {additive})/{multiplier} >= 3 and D_out >= {FACT1_BOUND}",
                 report.arcs_min, ARC_THRESHOLD, extra=params.D_out >= FACT1_BOUND),
            step("translation", "c·p·|m| >= D_in + D_out", translation, params.D_in + params.D_out),
            step("triangle", "c·p·|m| - D_out >= D_in", translation - params.D_out, params.D_in),
        ]
        failing = next((s.name for s in steps if not s.holds), None)
        return ConstantChain(params=params, p=p, m=m, steps=steps, accepted=failing is None,
                             failing_step=failing)

    @classmethod
    def threshold_search(cls, cap: int = 100, additive: int = FACT3_ADDITIVE,
                         multiplier: int = FACT3_MULTIPLIER) -> ThresholdSearch:
        """Smallest D_in for which the Behrstock chain closes, and the budget D_in + 4."""
        if cap < 2:
            raise HypothesisError("scan cap must be at least 2")
        verdicts = [(d, cls.behrstock_threshold_check(d, additive, multiplier).implies_D_out_4)
                    for d in range(2, cap + 1)]
        D_in_min = next((d for d, ok in verdicts if ok), None)
        monotone = D_in_min is not None and all(ok for d, ok in verdicts if d >= D_in_min)
        return ThresholdSearch(
            cap=cap,
            additive=additive,
            multiplier=multiplier,
            D_in_min=D_in_min,
            D_out=FACT1_BOUND,
            sum_min=None if D_in_min is None else D_in_min + FACT1_BOUND,
            monotone_above=monotone,
        )

    @staticmethod
    def _region(params: ProjectionParams, x: Fraction, y: Fraction) -> str:
        if x >= params.D_in:
            return "X_a"
        if y >= params.D_in:
            return "X_b"
        return "neither"

    @classmethod
    def simulate_relpa_pingpong(cls, params: ProjectionParams, p: int, trajectory_length: int,
                                seed: int = 0, max_attempts: int = 1000) -> SimulationTrace:
        """
        Symbolic ping-pong on the coordinates x = d_A(γ,∂B), y = d_B(γ,∂A).

        Each move by b^(mp) picks a translation t >= c·p·|m|, a new y within the
        triangle-inequality window [t - y, t + y] and a random x; instances that
        break the Behrstock constraint are rejected and redrawn. a-moves are
        symmetric. The token must alternate X_a, X_b, X_a, ...
        """
        if trajectory_length < 0:
            raise HypothesisError("trajectory length must be non-negative")
        if not cls.chain_verify(params, p, 1).accepted:
            raise HypothesisError(f"chain_verify rejects p = {p} for c = {params.c}")

        rng = random.Random(seed)
        rejected = 0

        def behrstock_ok(x: Fraction, y: Fraction) -> bool:
            return not (x >= params.D_in and y > params.D_out) and not (y >= params.D_in and x > params.D_out)

        def draw(sampler):
            nonlocal rejected
            for _ in range(max_attempts):
                x, y = sampler()
                if behrstock_ok(x, y):
                    return x, y
                rejected += 1
            raise HypothesisError("could not draw an axiom-respecting instance")

        x, y = draw(lambda: (Fraction(params.D_in + rng.randint(0, 10)), Fraction(rng.randint(0, params.D_in))))
        states = [TokenState(step=0, mover=None, exponent=0, x=x, y=y, region=cls._region(params, x, y))]
        passed = states[0].region == "X_a"

        for n in range(1, trajectory_length + 1):
            mover = "b" if n % 2 == 1 else "a"
            m = rng.choice([-3, -2, -1, 1, 2, 3])
            translation = params.c * p * abs(m) + rng.randint(0, 5)
            here = y if mover == "b" else x
            moved = translation - here + rng.randint(0, 2 * math.floor(here))
            if mover == "b":
                x, y = draw(lambda: (Fraction(rng.randint(0, params.D_in + 5)), moved))
            else:
                x, y = draw(lambda: (moved, Fraction(rng.randint(0, params.D_in + 5))))
            region = cls._region(params, x, y)
            states.append(TokenState(step=n, mover=mover, exponent=m * p, x=x, y=y, region=region))
            if region != ("X_b" if mover == "b" else "X_a"):
                passed = False

        if not passed:
            logger.error(f"Relative ping-pong simulation failed for c = {params.c}, p = {p}",
                         extra={"operation": "simulate_relpa_pingpong"})
        return SimulationTrace(params=params, p=p, trajectory_length=trajectory_length, seed=seed,
                               passed=passed, rejected=rejected, states=states)

    @classmethod
    def relpa_dispatch(cls, b_kind: ComponentKind, boundary_A: Optional[BoundaryPlacement],
                       boundary_B: Optional[BoundaryPlacement], params: ProjectionParams, k: int) -> RelPADispatch:
        """
        Which free subgroup the relative pseudo-Anosov argument produces.

        Args:
            b_kind: whether b is pseudo-Anosov or reducible
            boundary_A: for reducible b, where ∂A sits among b's components
            boundary_B: in case 3, where ∂B sits among a's components
            params: projection constants
            k: the power

        Returns:
            RelPADispatch with the subgroup form and its checked inequalities
        """
        p1 = cls.p1_constant([params.c])
        inequalities: List[ChainStep] = [step("power", "k > p₁", k, p1, strict=True)]
        if b_kind == ComponentKind.PSEUDO_ANOSOV:
            case, subgroup = "1", "⟨a^k, b^k a^k b^-k⟩"
            inequalities.append(step("boundary_moves", "k > 1/c", k, 1 / params.c, strict=True))
        elif boundary_A == BoundaryPlacement.IDENTITY_COMPONENTS:
            case, subgroup = "2", "⟨a^k, b^k a^k b^-k⟩"
            inequalities.append(step("twist_moves", "k > 2", k, 2, strict=True))
        elif boundary_A == BoundaryPlacement.PA_COMPONENT:
            if boundary_B == BoundaryPlacement.IDENTITY_COMPONENTS:
                case, subgroup = "3 (twist, roles swapped)", "⟨b^k, a^k b^k a^-k⟩"
                inequalities.append(step("twist_moves", "k > 2", k, 2, strict=True))
            elif boundary_B == BoundaryPlacement.PA_COMPONENT:
                case, subgroup = "3 (overlapping components)", "⟨a^k, b^k⟩"
            else:
                raise HypothesisError("case 3 needs the placement of ∂B")
        else:
            raise HypothesisError("reducible b needs the placement of ∂A")

        chain = cls.chain_verify(params, k, 1)
        accepted = chain.accepted and all(s.holds for s in inequalities)
        return RelPADispatch(case=case, subgroup=subgroup, k=k, inequalities=inequalities,
                             chain=chain, accepted=accepted)
