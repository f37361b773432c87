from enum import Enum
from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from app.models.quadratic import ExactRational


class ProjectionParams(BaseModel):
    """Abstract projection constants: translation c and the Behrstock thresholds."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    c: ExactRational
    D_in: int = 10
    D_out: int = 4

    @model_validator(mode="after")
    def check_thresholds(self):
        if self.c <= 0:
            raise ValueError("translation constant c must be positive")
        if not self.D_in > self.D_out >= 0:
            raise ValueError("thresholds need D_in > D_out >= 0")
        return self


class ChainStep(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    statement: str
    lhs: ExactRational
    rhs: ExactRational
    strict: bool = False
    holds: bool


def step(name: str, statement: str, lhs, rhs, strict: bool = False, extra: bool = True) -> ChainStep:
    lhs, rhs = Fraction(lhs), Fraction(rhs)
    holds = (lhs > rhs if strict else lhs >= rhs) and extra
    return ChainStep(name=name, statement=statement, lhs=lhs, rhs=rhs, strict=strict, holds=holds)


class ConstantChain(BaseModel):
    params: ProjectionParams
    p: int
    m: int
    steps: List[ChainStep]
    accepted: bool
    failing_step: Optional[str] = None


class BehrstockReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    D_in: int
    iuv_min: int
    exponent_floored: bool
    arcs_min: ExactRational
    additive: int
    multiplier: int
    implies_D_out_4: bool


class ThresholdSearch(BaseModel):
    cap: int
    additive: int
    multiplier: int
    D_in_min: Optional[int]
    D_out: int
    sum_min: Optional[int]
    monotone_above: bool


class TokenState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    step: int
    mover: Optional[str]
    exponent: int
    # x = d_A(γ, ∂B), y = d_B(γ, ∂A)
    x: ExactRational
    y: ExactRational
    region: str


class SimulationTrace(BaseModel):
    params: ProjectionParams
    p: int
    trajectory_length: int
    seed: int
    passed: bool
    rejected: int
    states: List[TokenState]


class ComponentKind(str, Enum):
    PSEUDO_ANOSOV = "pseudo_anosov"
    REDUCIBLE = "reducible"


class BoundaryPlacement(str, Enum):
    """Where a component boundary sits relative to the other element."""

    IDENTITY_COMPONENTS = "identity_components"
    PA_COMPONENT = "pa_component"


class RelPADispatch(BaseModel):
    case: str
    subgroup: str
    k: int
    inequalities: List[ChainStep]
    chain: ConstantChain
    accepted: bool
