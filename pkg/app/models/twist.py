from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, field_validator

from app.core.errors import HypothesisError
from app.models.curves import Slope


class TwistFactor(BaseModel):
    model_config = ConfigDict(frozen=True)

    axis: Slope
    power: int


class TwistWord(BaseModel):
    """A product of Dehn twist powers along a multicurve.

    Distinct slopes on the torus always intersect, so a multicurve is a single
    slope and the word collapses to one factor.
    """

    model_config = ConfigDict(frozen=True)

    factors: List[TwistFactor]

    @field_validator("factors")
    @classmethod
    def collapse(cls, factors: List[TwistFactor]) -> List[TwistFactor]:
        if not factors:
            raise ValueError("a twist word needs at least one factor")
        axis = factors[0].axis
        if any(f.axis != axis for f in factors):
            raise ValueError("twist axes must be disjoint; distinct torus slopes intersect")
        total = sum(f.power for f in factors)
        if total == 0:
            raise ValueError("twist powers cancel to zero")
        return [TwistFactor(axis=axis, power=total)]

    @classmethod
    def single(cls, axis: Slope, power: int) -> "TwistWord":
        if power == 0:
            raise HypothesisError("twist power must be nonzero")
        return cls(factors=[TwistFactor(axis=axis, power=power)])

    @property
    def axis(self) -> Slope:
        return self.factors[0].axis

    @property
    def power(self) -> int:
        return self.factors[0].power

    def raised(self, k: int) -> "TwistWord":
        return TwistWord.single(self.axis, self.power * k)


class PingPongSets(BaseModel):
    """X_a = {γ : i(γ,α) < i(γ,β)} and X_b = {γ : i(γ,β) < i(γ,α)}."""

    alpha: Slope
    beta: Slope


class Membership(str, Enum):
    IN_XA = "in_Xa"
    IN_XB = "in_Xb"
    NEITHER = "neither"


class TwistInequalityReport(BaseModel):
    lhs: int
    rhs: int
    holds: bool
    strict: bool = False


class PingPongCounterexample(BaseModel):
    gamma: Slope
    power: int
    mover: str
    image: Slope
    expected: Membership
    found: Membership


class FuzzReport(BaseModel):
    instances: int
    violations: int
    seed: int
    first_violation: dict = {}
