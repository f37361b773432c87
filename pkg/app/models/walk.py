from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from app.models.curves import MappingClass
from app.models.quadratic import ExactQuadratic, ExactRational


class WalkTable(BaseModel):
    """Exact return probabilities p⁽ⁿ⁾ for n = 0..steps of a simple random walk."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    generators: List[MappingClass] = []
    # set for the radial chain of the rank-k free group
    rank: Optional[int] = None
    method: str = "exact_dp"
    probs: List[ExactRational]
    truncated: bool = False
    truncated_at: Optional[int] = None

    @property
    def steps(self) -> int:
        return len(self.probs) - 1


class RhoEstimate(BaseModel):
    table: WalkTable
    even_steps: List[int]
    # (p⁽²ⁿ⁾)^(1/2n), each a lower bound for ρ
    lower_bounds: List[float]
    lower_bounds_decimal: List[str]
    best: float
    best_index: int
    # sqrt(p⁽²ⁿ⁾ / p⁽²ⁿ⁻²⁾) at the last even index
    ratio_estimate: Optional[float] = None


class CorollaryBound(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    k: int
    w: int
    denominator_digits: int
    f: ExactQuadratic
    gap: str
    kappa_free: ExactQuadratic
    kappa_group: ExactQuadratic


class MonteCarloResult(BaseModel):
    generators: List[MappingClass]
    steps: int
    trials: int
    seed: int
    batch_size: int
    returns: List[int]
    frequencies: List[float]
    standard_errors: List[float]
