"""Domain model dataclasses for latininf."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from latininf.utils.formatting import format_rational


def render_param(value) -> str:
    """Deterministic text for a requirement parameter (numbers, tuples, text)."""
    if isinstance(value, tuple):
        return "(" + ",".join(render_param(v) for v in value) + ")"
    if isinstance(value, frozenset):
        return "{" + ",".join(sorted(render_param(v) for v in value)) + "}"
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return format_rational(value)
    return str(value)


@dataclass(frozen=True)
class Requirement:
    """One dense-set target: a family tag plus its parameters."""

    family: str
    params: tuple = ()

    @property
    def label(self) -> str:
        return f"{self.family}[{','.join(render_param(p) for p in self.params)}]"


@dataclass
class StepRecord:
    step: int
    requirement: str
    growth: int
    already_satisfied: bool

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "requirement": self.requirement,
            "growth": self.growth,
            "already_satisfied": self.already_satisfied,
        }

    @classmethod
    def from_dict(cls, row: dict) -> "StepRecord":
        return cls(
            step=row["step"],
            requirement=row["requirement"],
            growth=row["growth"],
            already_satisfied=row["already_satisfied"],
        )


@dataclass
class BuildLog:
    """Append-only per-step log of a scheduler run (no timestamps)."""

    records: list[StepRecord] = field(default_factory=list)

    def append(self, record: StepRecord) -> None:
        self.records.append(record)

    @property
    def max_growth(self) -> int:
        return max((r.growth for r in self.records), default=0)

    @property
    def satisfied_count(self) -> int:
        return sum(1 for r in self.records if r.already_satisfied)

    def __len__(self) -> int:
        return len(self.records)

    def extend(self, other: "BuildLog") -> None:
        self.records.extend(other.records)

    def to_list(self) -> list[dict]:
        return [r.to_dict() for r in self.records]

    @classmethod
    def from_list(cls, rows: list[dict]) -> "BuildLog":
        return cls([StepRecord.from_dict(r) for r in rows])


@dataclass
class VerificationReport:
    property: str
    passed: bool
    witnesses: list[dict] = field(default_factory=list)
    statistics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and not self.witnesses:
            raise ValueError(f"failed {self.property} report must carry a witness")

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "passed": self.passed,
            "witnesses": self.witnesses,
            "statistics": self.statistics,
        }


@dataclass
class ProbeResult:
    """Outcome of a real-line pair probe."""

    direction: str              # "row" or "column"
    ordered: bool               # False: the pair only occurs in reversed order
    i: Optional[float] = None
    j: Optional[float] = None
    residuals: tuple[float, ...] = ()
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "ordered": self.ordered,
            "i": self.i,
            "j": self.j,
            "residuals": list(self.residuals),
            "iterations": self.iterations,
        }


@dataclass
class RunConfig:
    """Validated CLI run parameters."""

    subcommand: str
    group: Optional[str] = None
    index: Optional[str] = None
    steps: int = 0
    out: Optional[str] = None
    tolerance: float = 1e-10
    jobs: int = 1
    deterministic: bool = True

    def validate(self) -> "RunConfig":
        """Raise ValueError (or a descriptor error) on an unusable configuration."""
        from latininf.groups import parse_group
        from latininf.index import parse_index

        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.group is not None:
            parse_group(self.group)
        if self.index is not None:
            parse_index(self.index)
        return self
