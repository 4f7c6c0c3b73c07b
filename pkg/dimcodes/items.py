# Models for every record dimcodes exports
#
# Each exporter takes one of these per row; pipelines turn them into CSV or
# JSON through ``model_dump``.

from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .streams import BernoulliSource, ConstantSource, DyadicSource, PrefixSource


class Record(BaseModel):
    model_config = ConfigDict(frozen=True)

    @classmethod
    def columns(cls) -> List[str]:
        return list(cls.model_fields)


class BoundsRow(Record):
    """Distance envelope between two dimensions"""
    s: float
    t: float
    min_distance: float
    max_distance: float


class Fig1Row(Record):
    """Worst(s, 1/2) and H^-1(s - 1/2) over s in [1/2, 1]"""
    s: float
    worst: float
    min_distance: float
    transition: bool = False


class Fig2Row(Record):
    """Worst(1/2, t) and H^-1(1/2 - t) over t in [0, 1/2]"""
    t: float
    worst: float
    min_distance: float
    transition: bool = False


class Fig3Row(Record):
    """f(d) at s = 1/2 with its lower and linear upper envelopes"""
    d: float
    f: float
    lower: float
    upper: float
    transition: bool = False


class LedgerEntry(Record):
    chunk: int
    header_bits: int
    payload_bits: int
    cumulative_bits: int
    cumulative_ratio: float


class ProfileRow(Record):
    n: int
    distance: float
    density_a: float
    density_b: float


class ChangePositionRow(Record):
    position: int


class ChangeDensityRow(Record):
    n: int
    change_density: float


class CodeReportRow(Record):
    """Verification summary of one covering code"""
    n: int
    r: int
    seed: int
    size: int
    target_size: int
    covering: bool
    well_distributed: Optional[bool] = None


class DistributionRow(Record):
    q: int
    max_count: int
    bound: int


class MinCoverRow(Record):
    n: int
    r: int
    k_exact: int
    sphere_bound: float
    delsarte_piret: int


class BallCoverRow(Record):
    n: int
    q: int
    r: int
    seed: int
    size: int
    target: int
    attempts: int


class SourceDescriptor(Record):
    """CLI-facing description of a primitive source"""
    kind: Literal["zeros", "ones", "bernoulli", "dyadic"]
    p: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    r: Optional[str] = None
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @field_validator("r")
    @classmethod
    def _rational(cls, value):
        if value is not None and not 0 <= Fraction(value) <= 1:
            raise ValueError(f"r={value} outside [0, 1]")
        return value

    def build(self) -> PrefixSource:
        if self.kind == "zeros":
            return ConstantSource(0)
        if self.kind == "ones":
            return ConstantSource(1)
        if self.kind == "bernoulli":
            return BernoulliSource(0.5 if self.p is None else self.p, self.seed)
        return DyadicSource(Fraction(self.r or "1/2"))


class CommandResult(Record):
    """Outcome of one CLI invocation"""
    status: int
    artifacts: List[str] = []
    summary: Dict[str, Any] = {}
