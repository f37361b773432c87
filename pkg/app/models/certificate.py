from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, computed_field

from app.models.curves import MappingClass

_SUPERSCRIPTS = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")


class CertificateKind(str, Enum):
    TWIST_PINGPONG = "twist_pingpong"
    PROJECTIVE_PINGPONG = "projective_pingpong"
    ORACLE_ONLY = "oracle_only"


class FreeCertificate(BaseModel):
    """Evidence that two elements generate a rank-2 free group.

    Ping-pong kinds are proofs; oracle_only only asserts that no relation of
    length <= parameters["depth"] exists.
    """

    kind: CertificateKind
    generators: Tuple[MappingClass, MappingClass]
    parameters: Dict[str, Any] = {}
    oracle_depth: Optional[int] = None

    @property
    def is_proof(self) -> bool:
        return self.kind != CertificateKind.ORACLE_ONLY


class RelationWord(BaseModel):
    """A freely reduced word in a, A = a⁻¹, b, B = b⁻¹."""

    letters: List[str]

    @computed_field
    @property
    def text(self) -> str:
        parts = []
        for letter in self.letters:
            base, sign = letter.lower(), (1 if letter.islower() else -1)
            if parts and parts[-1][0] == base:
                parts[-1][1] += sign
            else:
                parts.append([base, sign])
        return " ".join(base if exp == 1 else base + str(exp).translate(_SUPERSCRIPTS)
                        for base, exp in parts)

    def __len__(self) -> int:
        return len(self.letters)


class SchreierGenerator(BaseModel):
    element: MappingClass
    a_length: int
    # signed 1-based generator indices: 2 is g2, -2 is g2⁻¹
    word: List[int]


class PurifiedGenerators(BaseModel):
    originals: List[MappingClass]
    index: int
    schreier: List[SchreierGenerator]


class UniformConstants(BaseModel):
    p: int
    index: int
    w: int
    r_symbolic: str
    r_decimal: float


class SearchConfig(BaseModel):
    max_power: int = 32
    oracle_depth: int = 10
    sample_box: int = 5
    sample_powers: List[int] = [1, -1, 2, -2, 3, -3]
    precision_max: int = 64


class IndependenceResult(BaseModel):
    u: MappingClass
    v: MappingClass
    u_length: int
    v_length: int
    certificate: FreeCertificate
    growth_bound: float
    case: str
    p_used: int
    index: int
    pure_pair: Tuple[SchreierGenerator, SchreierGenerator]
    uniform: UniformConstants
    notes: List[str] = []

    @computed_field
    @property
    def max_length(self) -> int:
        return max(self.u_length, self.v_length)
