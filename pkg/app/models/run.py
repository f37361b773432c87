from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


class RunConfig(BaseModel):
    subcommand: str
    inputs: Dict[str, Any] = {}
    caps: Dict[str, Any] = {}
    seed: Optional[int] = None
    output_format: OutputFormat = OutputFormat.JSON


class RunReport(BaseModel):
    app: str
    version: str
    config: RunConfig
    result: Any


class CriterionResult(BaseModel):
    number: int
    title: str
    passed: bool
    detail: Dict[str, Any] = {}


class ReproduceReport(BaseModel):
    quick: bool
    passed: bool
    criteria: List[CriterionResult]
