import math
import os
import shelve
from typing import Dict, List, Optional, Set, Tuple

from app.core import sl2
from app.core.config import get_settings
from app.core.errors import HypothesisError
from app.core.logger import logger
from app.models.curves import MappingClass
from app.models.growth import BallTable, GrowthEstimate

Layer = Set[sl2.Key]


def symmetrize(generators: List[MappingClass]) -> List[sl2.Key]:
    """Distinct generators together with their inverses, in a fixed order."""
    closed = set()
    for g in generators:
        closed.add(g.entries)
        closed.add(g.inverse().entries)
    closed.discard(sl2.IDENTITY_KEY)
    return sorted(closed)


class BallCache:
    """On-disk store of ball sizes and the last two BFS layers, keyed by generators."""

    def __init__(self, directory: str):
        os.makedirs(directory, exist_ok=True)
        self.path = os.path.join(directory, "balls")

    @staticmethod
    def key(generators: List[sl2.Key]) -> str:
        return ";".join(",".join(str(x) for x in m) for m in generators)

    def load(self, generators: List[sl2.Key]) -> Optional[Dict]:
        with shelve.open(self.path) as db:
            return db.get(self.key(generators))

    def store(self, generators: List[sl2.Key], sizes: List[int], previous: Layer, current: Layer) -> None:
        with shelve.open(self.path) as db:
            db[self.key(generators)] = {"sizes": sizes, "previous": previous, "current": current}


class GrowthService:
    """Exact ball counting in matrix groups and growth rate estimates."""

    @classmethod
    def ball_sizes(cls, generators: List[MappingClass], n: int, cap: Optional[int] = None,
                   cache_dir: Optional[str] = None) -> BallTable:
        """
        Sizes of word-metric balls of radius 0..n.

        Breadth-first over exact matrix keys. With a symmetric generating set the
        neighbours of layer k lie in layers k-1, k, k+1, so only two layers are kept.

        Args:
            generators: A; inverses are added when missing
            n: largest radius
            cap: element cap; exceeding it returns a truncated table
            cache_dir: ball cache directory (defaults to CACHE_DIR)

        Returns:
            BallTable with sizes[k] = |ball of radius k|
        """
        if n < 0:
            raise HypothesisError("radius must be non-negative")
        settings = get_settings()
        cap = settings.BALL_CAP if cap is None else cap
        cache_dir = settings.CACHE_DIR if cache_dir is None else cache_dir
        gens = symmetrize(generators)

        steps = [sl2.matrix(s) for s in gens]

        cache = BallCache(cache_dir) if cache_dir else None
        sizes, previous, current = [1], set(), {sl2.IDENTITY_KEY: sl2.identity()}
        truncated_at = None
        if cache is not None:
            stored = cache.load(gens)
            if stored is not None:
                sizes, previous = stored["sizes"], stored["previous"]
                current = {k: sl2.matrix(k) for k in stored["current"]}
                # the stored run may have used a larger cap
                truncated_at = next((k for k, size in enumerate(sizes[: n + 1]) if k and size > cap), None)
                if truncated_at is not None:
                    sizes = sizes[:truncated_at]
                    logger.warning(f"Cached ball sizes exceed cap {cap} at radius {truncated_at}",
                                   extra={"operation": "ball_sizes"})
                else:
                    logger.info(f"Resuming ball enumeration at radius {len(sizes) - 1}",
                                extra={"operation": "ball_sizes"})

        radius = len(sizes) - 1
        while truncated_at is None and radius < n:
            frontier: Dict[sl2.Key, sl2.Mat] = {}
            for g in current.values():
                for s in steps:
                    h = g * s
                    k = sl2.key(h)
                    if k not in current and k not in previous:
                        frontier[k] = h
                if sizes[-1] + len(frontier) > cap:
                    break
            if sizes[-1] + len(frontier) > cap:
                truncated_at = radius + 1
                logger.warning(f"Truncated ball enumeration at radius {truncated_at}: cap {cap} exceeded",
                               extra={"operation": "ball_sizes"})
                break
            sizes.append(sizes[-1] + len(frontier))
            previous, current = set(current), frontier
            radius += 1
            if cache is not None:
                cache.store(gens, sizes, previous, set(current))

        return BallTable(
            generators=[MappingClass.from_tuple(m) for m in gens],
            sizes=sizes[: n + 1],
            requested_radius=n,
            cap=cap,
            truncated=truncated_at is not None,
            truncated_at=truncated_at,
        )

    @staticmethod
    def growth_estimate(table: BallTable, window: int) -> GrowthEstimate:
        """
        Rates log(sizes[k])/k and the tail estimate of h(G,A) over the last `window` radii.

        `extrapolated` averages successive log-ratios, which removes the constant
        prefactor of the ball sizes; `mean_rate` averages the raw rates.
        """
        if window < 1:
            raise HypothesisError("window must be at least 1")
        if len(table.sizes) < window + 2:
            raise HypothesisError(f"window {window} needs at least {window + 2} radii, table has {len(table.sizes)}")

        sizes = table.sizes
        rates = [math.log(sizes[k]) / k for k in range(1, len(sizes))]
        radii = list(range(len(sizes) - window, len(sizes)))
        mean_rate = sum(rates[k - 1] for k in radii) / window
        extrapolated = sum(math.log(sizes[k] / sizes[k - 1]) for k in radii) / window
        return GrowthEstimate(
            table=table,
            window=window,
            rates=rates,
            mean_rate=mean_rate,
            extrapolated=extrapolated,
            extrapolated_decimal=f"{extrapolated:.12f}",
            window_radii=radii,
        )


def ball_table_rows(table: BallTable) -> List[Tuple[int, int, str]]:
    """CSV rows radius,size,rate."""
    rows = []
    for k, size in enumerate(table.sizes):
        rate = "" if k == 0 else f"{math.log(size) / k:.12f}"
        rows.append((k, size, rate))
    return rows
