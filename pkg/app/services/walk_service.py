import math
import random
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from app.core import sl2
from app.core.config import get_settings
from app.core.errors import HypothesisError
from app.core.logger import logger
from app.models.curves import MappingClass
from app.models.quadratic import QuadraticIrrational
from app.models.walk import CorollaryBound, MonteCarloResult, RhoEstimate, WalkTable

# key -> (matrix, number of walks reaching it)
Distribution = Dict[sl2.Key, Tuple[sl2.Mat, int]]

# 1 - ρ(F₂) = 1 - √3/2
_FREE_GAP = QuadraticIrrational(2, -1, 2, 3)


def _step(distribution: Distribution, gens: List[sl2.Mat]) -> Distribution:
    following: Distribution = {}
    for g, count in distribution.values():
        for s in gens:
            h = g * s
            k = sl2.key(h)
            reached = following.get(k)
            following[k] = (h, count) if reached is None else (reached[0], reached[1] + count)
    return following


def _check_symmetric(generators: List[MappingClass]) -> None:
    present = {g.entries for g in generators}
    if any(g.inverse().entries not in present for g in generators):
        raise HypothesisError("step set is not symmetric")


def _meet(left: Distribution, right: Distribution) -> int:
    """Walks of length |left|+|right| returning to I: Σ_g left(g)·right(g⁻¹)."""
    if len(left) > len(right):
        left, right = right, left
    total = 0
    for g, count in left.values():
        back = right.get(sl2.key(sl2.inv(g)))
        if back is not None:
            total += count * back[1]
    return total


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


class WalkService:
    """Return probabilities of simple random walks and Kesten radius estimates."""

    @staticmethod
    def return_probs(generators: List[MappingClass], N: int, state_cap: Optional[int] = None) -> WalkTable:
        """
        Exact p⁽ⁿ⁾ for n = 0..N, uniform over the list as given.

        Counts walks on exact matrix keys. A walk of length n returns to I iff its
        first ⌊n/2⌋ steps reach g and its remaining steps reach g⁻¹, so only
        distributions up to ⌈N/2⌉ steps are enumerated.

        Raises:
            HypothesisError: the list is not closed under inverses
        """
        if N < 0:
            raise HypothesisError("number of steps must be non-negative")
        if not generators:
            raise HypothesisError("generating set must be nonempty")
        state_cap = get_settings().WALK_STATE_CAP if state_cap is None else state_cap
        _check_symmetric(generators)
        gens = [g.matrix for g in generators]
        if len({g.entries for g in generators}) < len(gens):
            logger.warning("Duplicate generators are kept: the step kernel is uniform over the list",
                           extra={"operation": "return_probs"})

        size = len(gens)
        probs = [Fraction(1)]
        current: Distribution = {sl2.IDENTITY_KEY: (sl2.identity(), 1)}
        following = _step(current, gens)
        truncated_at = None
        half = 0
        while len(probs) <= N:
            n = len(probs)
            if n == 2 * half + 1:
                count = _meet(current, following)
            else:
                current, half = following, half + 1
                if len(current) > state_cap:
                    truncated_at = n
                    break
                count = _meet(current, current)
                if n < N:
                    following = _step(current, gens)
                    if len(following) > state_cap:
                        probs.append(Fraction(count, size ** n))
                        truncated_at = n + 1
                        break
            probs.append(Fraction(count, size ** n))

        if truncated_at is not None:
            logger.warning(f"Truncated walk table at step {truncated_at}: state cap {state_cap} exceeded",
                           extra={"operation": "return_probs"})
        return WalkTable(generators=list(generators), probs=probs,
                         truncated=truncated_at is not None, truncated_at=truncated_at)

    @staticmethod
    def free_radial_return_probs(k: int, N: int) -> WalkTable:
        """
        Return probabilities of the rank-k free group on standard generators.

        The distance from the identity is a birth-death chain: from 0 all 2k steps
        go out, from r >= 1 one step goes in and 2k-1 go out.
        """
        if k < 1:
            raise HypothesisError("rank must be at least 1")
        if N < 0:
            raise HypothesisError("number of steps must be non-negative")
        degree = 2 * k
        counts = [1]
        probs = [Fraction(1)]
        for n in range(1, N + 1):
            # radii beyond N - n can no longer return
            reach = min(n, N - n)
            following = [0] * (reach + 1)
            for r, c in enumerate(counts):
                if not c:
                    continue
                if r == 0:
                    if reach >= 1:
                        following[1] += degree * c
                    continue
                if r - 1 <= reach:
                    following[r - 1] += c
                if r + 1 <= reach:
                    following[r + 1] += (degree - 1) * c
            counts = following
            probs.append(Fraction(counts[0], degree ** n))
        return WalkTable(rank=k, method="free_radial", probs=probs)

    @staticmethod
    def rho_estimate(table: WalkTable) -> RhoEstimate:
        """
        Lower bounds (p⁽²ⁿ⁾)^(1/2n) for the spectral radius.

        Each is a rigorous bound by supermultiplicativity of even return
        probabilities; `ratio_estimate` converges faster but is not a bound.
        """
        if len(table.probs) < 3:
            raise HypothesisError("table needs the even index 2")
        even_steps, bounds = [], []
        for n in range(2, len(table.probs), 2):
            p = table.probs[n]
            if p > 0:
                even_steps.append(n)
                bounds.append(math.exp(_log_fraction(p) / n))
        if not bounds:
            raise HypothesisError("no positive even-step return probability")

        best = max(bounds)
        best_index = even_steps[bounds.index(best)]

        ratio = None
        last = (len(table.probs) - 1) // 2 * 2
        if last >= 4 and table.probs[last - 2] > 0 and table.probs[last] > 0:
            ratio = math.exp(_log_fraction(table.probs[last] / table.probs[last - 2]) / 2)

        return RhoEstimate(
            table=table,
            even_steps=even_steps,
            lower_bounds=bounds,
            lower_bounds_decimal=[f"{b:.12f}" for b in bounds],
            best=best,
            best_index=best_index,
            ratio_estimate=ratio,
        )

    @staticmethod
    def supermultiplicative(table: WalkTable) -> bool:
        """p⁽²ᵐ⁺²ⁿ⁾ >= p⁽²ᵐ⁾·p⁽²ⁿ⁾ for every computed even index."""
        probs = table.probs
        evens = range(0, len(probs), 2)
        return all(probs[i + j] >= probs[i] * probs[j] for i in evens for j in evens if i + j < len(probs))

    @staticmethod
    def kesten_free_radius(k: int) -> QuadraticIrrational:
        """√(2k-1)/k."""
        if k < 2:
            raise HypothesisError("rank must be at least 2")
        return QuadraticIrrational(0, 1, k, 2 * k - 1)

    @staticmethod
    def kappa_from_rho(rho: QuadraticIrrational) -> QuadraticIrrational:
        """κ = (1 - ρ)⁻¹."""
        if not rho < 1:
            raise HypothesisError("ρ must be below 1")
        return (1 - rho).reciprocal()

    @staticmethod
    def rho_from_kappa(kappa: QuadraticIrrational) -> QuadraticIrrational:
        """ρ = 1 - κ⁻¹."""
        if not kappa > 0:
            raise HypothesisError("κ must be positive")
        return 1 - kappa.reciprocal()

    @classmethod
    def corollary_bound(cls, k: int, w: int) -> CorollaryBound:
        """
        f(k) = 1 - (1 - √3/2) / (w³·(k-1)^(w-1)).

        Args:
            k: size of the symmetric generating set
            w: word length bound of the free pair

        Returns:
            CorollaryBound with f exact, the gap 1 - f in decimal, and κ of the
            free group and of the group
        """
        if k < 2 or w < 1:
            raise HypothesisError("need k >= 2 and w >= 1")
        denominator = w ** 3 * (k - 1) ** (w - 1)
        gap = _FREE_GAP / denominator
        kappa_free = cls.kappa_from_rho(QuadraticIrrational(0, 1, 2, 3))
        with localcontext() as ctx:
            ctx.prec = 30
            gap_decimal = (Decimal(2) - Decimal(3).sqrt()) / (2 * Decimal(denominator))
        return CorollaryBound(
            k=k,
            w=w,
            denominator_digits=len(str(denominator)),
            f=1 - gap,
            gap=format(gap_decimal, ".20e"),
            kappa_free=kappa_free,
            kappa_group=kappa_free * denominator,
        )

    @staticmethod
    def monte_carlo(generators: List[MappingClass], N: int, trials: int, seed: Optional[int] = None,
                    batch_size: Optional[int] = None) -> MonteCarloResult:
        """Empirical return frequencies; batch b draws from Random(seed·1000003 + b)."""
        if trials < 1:
            raise HypothesisError("trials must be at least 1")
        if N < 0:
            raise HypothesisError("number of steps must be non-negative")
        settings = get_settings()
        seed = settings.SEED if seed is None else seed
        batch_size = settings.MC_BATCH_SIZE if batch_size is None else batch_size
        if not generators:
            raise HypothesisError("generating set must be nonempty")
        _check_symmetric(generators)
        gens = [g.matrix for g in generators]

        returns = [0] * (N + 1)
        returns[0] = trials
        done, batch = 0, 0
        while done < trials:
            rng = random.Random(seed * 1_000_003 + batch)
            for _ in range(min(batch_size, trials - done)):
                g = sl2.identity()
                for n in range(1, N + 1):
                    g = g * rng.choice(gens)
                    if sl2.is_central(g) and g[0, 0] == 1:
                        returns[n] += 1
            done += min(batch_size, trials - done)
            batch += 1

        frequencies = [r / trials for r in returns]
        errors = [math.sqrt(f * (1 - f) / trials) for f in frequencies]
        logger.info(f"Monte Carlo walk: {trials} trials of {N} steps", extra={"operation": "monte_carlo"})
        return MonteCarloResult(generators=list(generators), steps=N, trials=trials, seed=seed,
                                batch_size=batch_size, returns=returns, frequencies=frequencies,
                                standard_errors=errors)
