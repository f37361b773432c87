import random
from typing import Iterable, List, Optional, Union

from app.core import sl2
from app.core.config import get_settings
from app.core.errors import HypothesisError, NotIndependentError
from app.core.logger import logger
from app.models.certificate import CertificateKind, FreeCertificate
from app.models.curves import MappingClass, Slope
from app.models.twist import (
    FuzzReport,
    Membership,
    PingPongCounterexample,
    PingPongSets,
    TwistInequalityReport,
    TwistWord,
)
from app.services.farey_service import FareyService

MIN_TWIST_POWER = 4


class TwistService:
    """Intersection estimates after Dehn twisting and twist ping-pong."""

    @staticmethod
    def word_matrix(word: TwistWord) -> MappingClass:
        result = MappingClass.identity()
        for factor in word.factors:
            result = result.compose(FareyService.twist_matrix(factor.axis, factor.power))
        return result

    @classmethod
    def twist_inequality_check(cls, twist: TwistWord, delta: Slope, delta_prime: Slope,
                               strict: bool = False) -> TwistInequalityReport:
        """
        Compare i(T(δ), δ') with Σ_j (|e_j| - 2)·i(δ,γ_j)·i(δ',γ_j) - i(δ,δ').

        Args:
            twist: T as a product of twist powers e_j about γ_j
            delta: δ
            delta_prime: δ'
            strict: drop the -2 (valid when all powers share a sign)

        Returns:
            TwistInequalityReport with the exact sides
        """
        i = FareyService.intersection
        lhs = i(FareyService.apply(cls.word_matrix(twist), delta), delta_prime)
        offset = 0 if strict else 2
        rhs = sum((abs(f.power) - offset) * i(delta, f.axis) * i(delta_prime, f.axis)
                  for f in twist.factors) - i(delta, delta_prime)
        return TwistInequalityReport(lhs=lhs, rhs=rhs, holds=lhs >= rhs, strict=strict)

    @staticmethod
    def pingpong_membership(sets: PingPongSets, gamma: Slope) -> Membership:
        to_alpha = FareyService.intersection(gamma, sets.alpha)
        to_beta = FareyService.intersection(gamma, sets.beta)
        if to_alpha < to_beta:
            return Membership.IN_XA
        if to_beta < to_alpha:
            return Membership.IN_XB
        return Membership.NEITHER

    @staticmethod
    def slope_box(n: int) -> List[Slope]:
        """All slopes with |p|, |q| <= n."""
        return [Slope(p=p, q=q) for q in range(0, n + 1) for p in range(-n, n + 1)
                if sl2.is_primitive(p, q) and (q > 0 or p == 1)]

    @classmethod
    def verify_twist_pingpong(cls, a: TwistWord, b: TwistWord,
                              sample: Optional[Iterable[Slope]] = None,
                              powers: Optional[Iterable[int]] = None
                              ) -> Union[FreeCertificate, PingPongCounterexample]:
        """
        Ping-pong for two twist powers with intersecting axes.

        The sampled orbits are a smoke test. The claim for every curve rests on
        the exact chain i(b^k γ, α) > ((|l|-2)·i(α,β) - 1)·i(γ,β) >= i(b^k γ, β),
        whose coefficient is checked here for both generators.

        Args:
            a: twist word about α
            b: twist word about β
            sample: curves to push around (defaults to the SAMPLE_BOX slope box)
            powers: nonzero exponents k applied as a^k, b^k

        Returns:
            FreeCertificate of kind twist_pingpong, or the first counterexample found

        Raises:
            NotIndependentError: i(α,β) = 0
            HypothesisError: a twist power of magnitude below 4
        """
        alpha, beta = a.axis, b.axis
        overlap = FareyService.intersection(alpha, beta)
        if overlap == 0:
            raise NotIndependentError(f"not independent: axes {alpha} and {beta} coincide, i(α,β) = 0")
        for word in (a, b):
            if abs(word.power) < MIN_TWIST_POWER:
                raise HypothesisError(
                    f"hypothesis violated: twist power {word.power} about {word.axis} has magnitude < 4")

        sample = list(sample) if sample is not None else cls.slope_box(get_settings().SAMPLE_BOX)
        powers = [k for k in (powers or [1, -1, 2, -2, 3, -3]) if k != 0]

        chain = []
        for name, word in (("b", b), ("a", a)):
            coefficient = (abs(word.power) - 2) * overlap - 1
            chain.append({
                "mover": name,
                "statement": "(|power| - 2)·i(α,β) - 1 >= 1",
                "power": word.power,
                "value": coefficient,
                "holds": coefficient >= 1,
            })

        sets = PingPongSets(alpha=alpha, beta=beta)
        movers = {"a": (a, Membership.IN_XB, Membership.IN_XA), "b": (b, Membership.IN_XA, Membership.IN_XB)}
        checked = 0
        for gamma in sample:
            start = cls.pingpong_membership(sets, gamma)
            for name, (word, source, target) in movers.items():
                if start != source:
                    continue
                for k in powers:
                    image = FareyService.apply(cls.word_matrix(word.raised(k)), gamma)
                    found = cls.pingpong_membership(sets, image)
                    checked += 1
                    if found != target:
                        logger.warning(f"Ping-pong counterexample at {gamma} under {name}^{k}",
                                       extra={"operation": "verify_twist_pingpong"})
                        return PingPongCounterexample(gamma=gamma, power=k, mover=name, image=image,
                                                      expected=target, found=found)

        certificate = FreeCertificate(
            kind=CertificateKind.TWIST_PINGPONG,
            generators=(cls.word_matrix(a), cls.word_matrix(b)),
            parameters={
                "alpha": str(alpha),
                "beta": str(beta),
                "a_power": a.power,
                "b_power": b.power,
                "intersection": overlap,
                "chain": chain,
                "sample_size": len(sample),
                "orbit_checks": checked,
                "sample_powers": powers,
                "X_a": "i(γ,α) < i(γ,β)",
                "X_b": "i(γ,β) < i(γ,α)",
            },
        )
        logger.info(f"Certificate issued: twist ping-pong for T_{alpha}^{a.power}, T_{beta}^{b.power}",
                    extra={"operation": "verify_twist_pingpong"})
        return certificate

    @classmethod
    def fuzz_twist_inequality(cls, instances: int = 10_000, max_power: int = 20, max_entry: int = 100,
                              seed: int = 0, strict: bool = False) -> FuzzReport:
        """Random instances of the twist inequality; any violation is a bug."""
        rng = random.Random(seed)

        def random_slope() -> Slope:
            while True:
                p, q = rng.randint(-max_entry, max_entry), rng.randint(-max_entry, max_entry)
                if sl2.is_primitive(p, q):
                    return Slope.of(p, q)

        violations, first = 0, {}
        for _ in range(instances):
            power = rng.choice([k for k in range(-max_power, max_power + 1) if k != 0])
            if strict:
                power = abs(power)
            twist = TwistWord.single(random_slope(), power)
            delta, delta_prime = random_slope(), random_slope()
            report = cls.twist_inequality_check(twist, delta, delta_prime, strict=strict)
            if not report.holds:
                violations += 1
                if not first:
                    first = {"twist": str(twist.axis), "power": power, "delta": str(delta),
                             "delta_prime": str(delta_prime), "lhs": report.lhs, "rhs": report.rhs}
        if violations:
            logger.error(f"Twist inequality violated {violations} times", extra={"operation": "fuzz"})
        return FuzzReport(instances=instances, violations=violations, seed=seed, first_violation=first)
