"""HTTP facade over the curvature engine.

Endpoints mirror the CLI subcommands: POST /run executes a configuration
and returns the canonical JSON report, GET /catalog lists metrics with
their parameter schemas, POST /verify re-checks a saved report.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from .. import engine, metrics
from ..errors import DomainError
from ..models import AnalysisReport, RunConfig, VerifyResult, report_to_canonical_json

app = FastAPI(
    title="weyl-lab",
    description="Pointwise curvature engine and identity-verification suite "
                "for conformally recurrent pseudo-Riemannian metrics.",
    version="0.1.0",
)


class HealthResponse(BaseModel):
    status: str


class CatalogEntryModel(BaseModel):
    name: str
    min_n: int
    description: str
    params: dict[str, str]


class CatalogResponse(BaseModel):
    metrics: list[CatalogEntryModel]
    checks: list[str]
    default_tolerances: dict[str, float]


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok")


@app.get("/catalog", response_model=CatalogResponse)
def catalog() -> CatalogResponse:
    return CatalogResponse(
        metrics=[CatalogEntryModel(**entry) for entry in metrics.catalog_listing()],
        checks=list(engine.CHECK_NAMES),
        default_tolerances=dict(engine.DEFAULT_TOLERANCES),
    )


@app.post("/run")
def run(config: RunConfig) -> Response:
    try:
        report = engine.run(config)
    except DomainError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return Response(content=report_to_canonical_json(report),
                    media_type="application/json")


@app.post("/verify", response_model=VerifyResult)
def verify(report: AnalysisReport) -> VerifyResult:
    return engine.verify_report(report.model_dump(by_alias=True))
