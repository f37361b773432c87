from typing import List, Optional

from pydantic import BaseModel, computed_field, model_validator

from app.models.curves import MappingClass


class BallTable(BaseModel):
    """Ball sizes in the word metric; sizes[k] counts elements of length <= k."""

    generators: List[MappingClass]
    sizes: List[int]
    requested_radius: int
    cap: int
    truncated: bool = False
    # first radius whose ball would have exceeded the cap
    truncated_at: Optional[int] = None

    @model_validator(mode="after")
    def check_sizes(self):
        if not self.sizes or self.sizes[0] != 1:
            raise ValueError("a ball table starts with the identity alone")
        branching = 1 + len(self.generators)
        for k in range(1, len(self.sizes)):
            if not self.sizes[k - 1] <= self.sizes[k] <= self.sizes[k - 1] * branching:
                raise ValueError(f"ball sizes break monotonicity or branching at radius {k}")
        return self

    @computed_field
    @property
    def radius(self) -> int:
        return len(self.sizes) - 1

    @computed_field
    @property
    def length_less_than(self) -> List[int]:
        """b(G,A,n) for n = 0..radius+1: elements of word length < n."""
        return [0] + list(self.sizes)


class GrowthEstimate(BaseModel):
    table: BallTable
    window: int
    # rates[k - 1] = log(sizes[k]) / k
    rates: List[float]
    mean_rate: float
    # mean of log(sizes[k] / sizes[k - 1]) over the window
    extrapolated: float
    extrapolated_decimal: str
    window_radii: List[int]
