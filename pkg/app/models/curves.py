import re
from enum import Enum
from math import gcd
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from app.core import sl2
from app.core.errors import HypothesisError, NotACurveError, ParseError
from app.models.quadratic import ExactQuadratic

_INT = r"\s*([+-]?\d+)\s*"
_NESTED = re.compile(rf"^\s*\[\s*\[{_INT},{_INT}\]\s*,\s*\[{_INT},{_INT}\]\s*\]\s*$")
_SLOPE = re.compile(rf"^{_INT}/{_INT}$")


class Slope(BaseModel):
    """A curve on the punctured torus: a primitive vector up to sign."""

    model_config = ConfigDict(frozen=True)

    p: int
    q: int

    @model_validator(mode="after")
    def check_canonical(self):
        if gcd(self.p, self.q) != 1:
            raise ValueError(f"({self.p}, {self.q}) is not a curve")
        if not (self.q > 0 or (self.q == 0 and self.p == 1)):
            raise ValueError(f"({self.p}, {self.q}) is not in canonical form")
        return self

    @classmethod
    def of(cls, p: int, q: int) -> "Slope":
        """Canonical slope of ±(p, q)."""
        if gcd(p, q) != 1:
            raise NotACurveError(f"({p}, {q}) is not a curve: gcd is {gcd(p, q)}")
        p, q = sl2.canonical_pair(p, q)
        return cls(p=p, q=q)

    @classmethod
    def parse(cls, text: str) -> "Slope":
        match = _SLOPE.match(text)
        if not match:
            raise ParseError("expected a slope of the form p/q", text)
        return cls.of(int(match.group(1)), int(match.group(2)))

    @property
    def vector(self) -> sl2.Vec:
        return (self.p, self.q)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


class MappingClass(BaseModel):
    """A determinant-one integer matrix, row-major."""

    model_config = ConfigDict(frozen=True)

    a: int
    b: int
    c: int
    d: int

    @model_validator(mode="after")
    def check_determinant(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self} is not 1")
        return self

    @classmethod
    def from_tuple(cls, m: sl2.Key) -> "MappingClass":
        return cls(a=m[0], b=m[1], c=m[2], d=m[3])

    @classmethod
    def from_matrix(cls, m: sl2.Mat) -> "MappingClass":
        return cls.from_tuple(sl2.key(m))

    @classmethod
    def identity(cls) -> "MappingClass":
        return cls.from_tuple(sl2.IDENTITY_KEY)

    @classmethod
    def parse(cls, text: str) -> "MappingClass":
        match = _NESTED.match(text)
        if match:
            entries = [int(g) for g in match.groups()]
        else:
            tokens = [t for t in re.split(r"[\s,\[\]]+", text) if t]
            if len(tokens) != 4:
                raise ParseError("expected [[a,b],[c,d]] or 'a b c d'", text)
            try:
                entries = [int(t) for t in tokens]
            except ValueError:
                bad = next(t for t in tokens if not re.fullmatch(r"[+-]?\d+", t))
                raise ParseError("not an integer", bad)
        if sl2.det(sl2.matrix(entries)) != 1:
            raise HypothesisError(f"{text.strip()} does not have determinant 1")
        return cls.from_tuple(tuple(entries))

    @property
    def entries(self) -> sl2.Key:
        return (self.a, self.b, self.c, self.d)

    @property
    def matrix(self) -> sl2.Mat:
        """A fresh fmpz_mat; callers may not share it."""
        return sl2.matrix(self.entries)

    @property
    def trace(self) -> int:
        return self.a + self.d

    def compose(self, other: "MappingClass") -> "MappingClass":
        return MappingClass.from_matrix(self.matrix * other.matrix)

    def inverse(self) -> "MappingClass":
        return MappingClass.from_matrix(sl2.inv(self.matrix))

    def power(self, n: int) -> "MappingClass":
        return MappingClass.from_matrix(sl2.power(self.matrix, n))

    def conjugate_by(self, g: "MappingClass") -> "MappingClass":
        """g · self · g⁻¹"""
        return MappingClass.from_matrix(sl2.product([g.matrix, self.matrix, sl2.inv(g.matrix)]))

    def commutes_with(self, other: "MappingClass") -> bool:
        return sl2.commute(self.matrix, other.matrix)

    def projectively_equal(self, other: "MappingClass") -> bool:
        return self.entries == other.entries or self.matrix == -other.matrix

    def __str__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


def parse_slope(text: str) -> Slope:
    return Slope.parse(text)


def parse_matrix(text: str) -> MappingClass:
    return MappingClass.parse(text)


def parse_generators(text: str) -> List[MappingClass]:
    """Matrices separated by ';'."""
    chunks = [chunk for chunk in text.split(";") if chunk.strip()]
    if not chunks:
        raise ParseError("no generators given", text)
    return [MappingClass.parse(chunk) for chunk in chunks]


class ClassificationKind(str, Enum):
    IDENTITY = "identity"
    FINITE_ORDER = "finite_order"
    DEHN_TWIST = "dehn_twist"
    PSEUDO_ANOSOV = "pseudo_anosov"


class ClassificationResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: ClassificationKind
    trace: int
    axis: Optional[Slope] = None
    power: Optional[int] = None
    central_sign: Optional[int] = None
    dilatation: Optional[ExactQuadratic] = None
    reducing_system: List[Slope] = []


class DistanceResult(BaseModel):
    source: Slope
    target: Slope
    cap: int
    distance: Optional[int] = None
    exceeds_cap: bool = False
    method: str = "continued_fraction"
    path: Optional[List[Slope]] = None
