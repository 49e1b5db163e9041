"""Pydantic request/response models shared by the engine, service and CLI."""

from __future__ import annotations

import json
from typing import Any, Optional

from pydantic import AliasChoices, BaseModel, ConfigDict, Field


class MetricConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    params: dict[str, Any] = Field(default_factory=dict)


class PointsSpec(BaseModel):
    """Sample points: explicit list, or seeded uniform draws from a box."""
    model_config = ConfigDict(extra="forbid")

    count: int = 20
    box: tuple[float, float] = (0.1, 1.0)
    seed: int = 0
    explicit: Optional[list[list[float]]] = None


class SyntheticSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    count: int = 50
    seed: int = 0
    dims: Optional[list[int]] = None  # defaults to [5, 6, 7]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    metric: MetricConfig
    n: int
    points: PointsSpec = Field(default_factory=PointsSpec)
    tolerances: dict[str, float] = Field(default_factory=dict)
    checks: Optional[list[str]] = None
    synthetic: SyntheticSpec = Field(default_factory=SyntheticSpec)
    jobs: int = 1
    output_path: Optional[str] = None


class DefectEntry(BaseModel):
    """A measured defect tagged with the tolerance it was compared against.

    tol None marks an informational value that cannot fail the run.
    """
    model_config = ConfigDict(extra="forbid")

    value: Optional[float]
    tol: Optional[float] = None
    passed: Optional[bool] = None


class CheckResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    status: str  # pass | fail | inapplicable | error | skipped
    reason: Optional[str] = None
    defects: dict[str, DefectEntry] = Field(default_factory=dict)
    info: dict[str, Any] = Field(default_factory=dict)


class PointRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    index: int
    point: list[float]
    status: str
    reason: Optional[str] = None
    signature: Optional[list[int]] = None
    flags: dict[str, Any] = Field(default_factory=dict)
    checks: dict[str, CheckResult] = Field(default_factory=dict)


class SummaryRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    check: str
    defect: str
    max_value: Optional[float]
    tolerance: Optional[float]
    verdict: str  # pass | fail | inapplicable | info
    evaluated: int


class AnalysisReport(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: int = Field(
        default=1,
        serialization_alias="schema",
        validation_alias=AliasChoices("schema", "schema_version"),
    )
    config: RunConfig
    engine: dict[str, Any]
    points: list[PointRecord]
    synthetic: dict[str, Any]
    arithmetic: dict[str, Any]
    checks: list[SummaryRow]
    verdict: str
    timestamp: Optional[str] = None


class VerifyResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    consistent: bool
    mismatches: list[str]


def report_to_canonical_json(report: AnalysisReport) -> bytes:
    """Deterministic byte serialization (sorted keys, fixed separators)."""
    payload = report.model_dump(by_alias=True, mode="json")
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)
    return (text + "\n").encode("utf-8")


def canonical_without_timestamp(raw: bytes) -> bytes:
    """Canonical bytes of a report with the timestamp removed (for diffs)."""
    payload = json.loads(raw.decode("utf-8"))
    payload.pop("timestamp", None)
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)
    return (text + "\n").encode("utf-8")
