"""weyl-lab command line: a thin client over the engine / service layer.

Without --server everything runs in-process; with --server the run is
POSTed to a running service instance and the returned report is used
unchanged. Exit codes: 0 all hard checks pass, 1 check failures or every
point failing, 2 configuration errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import engine, metrics
from .errors import DomainError, WeylLabError
from .models import RunConfig, report_to_canonical_json

CONFIG_ERROR_EXIT = 2
CHECK_FAIL_EXIT = 1


def _fail_config(message: str) -> None:
    click.echo(f"config error: {message}", err=True)
    sys.exit(CONFIG_ERROR_EXIT)


def _load_config(config_path: str | None, overrides: dict) -> RunConfig:
    payload: dict = {}
    if config_path:
        try:
            payload = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            _fail_config(f"cannot read {config_path}: {exc}")
    metric = payload.setdefault("metric", {})
    if overrides.get("metric"):
        metric["name"] = overrides["metric"]
    if overrides.get("n") is not None:
        payload["n"] = overrides["n"]
    points = payload.setdefault("points", {})
    if overrides.get("points") is not None:
        points["count"] = overrides["points"]
    if overrides.get("seed") is not None:
        points["seed"] = overrides["seed"]
        payload.setdefault("synthetic", {})["seed"] = overrides["seed"]
    if overrides.get("box") is not None:
        try:
            lo, hi = (float(v) for v in overrides["box"].split(","))
        except ValueError:
            _fail_config(f"--box must be 'lo,hi', got {overrides['box']!r}")
        points["box"] = (lo, hi)
    if overrides.get("synthetic") is not None:
        payload.setdefault("synthetic", {})["count"] = overrides["synthetic"]
    if overrides.get("jobs") is not None:
        payload["jobs"] = overrides["jobs"]
    if overrides.get("checks"):
        payload["checks"] = [c.strip() for c in overrides["checks"].split(",") if c.strip()]
    for item in overrides.get("tol", ()):
        if "=" not in item:
            _fail_config(f"--tol expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        try:
            payload.setdefault("tolerances", {})[key] = float(value)
        except ValueError:
            _fail_config(f"--tol value for {key!r} is not a number: {value!r}")
    if overrides.get("out"):
        payload["output_path"] = overrides["out"]
    try:
        config = RunConfig.model_validate(payload)
        # fail fast on unknown metric names, bad parameters, tolerance keys
        metrics.MetricSpec(config.metric.name, config.n, dict(config.metric.params))
        engine.merge_tolerances(config.tolerances)
        engine.resolve_checks(config.checks)
    except (ValueError, DomainError) as exc:
        _fail_config(str(exc))
    return config


@click.group()
def main() -> None:
    """Curvature engine and identity-verification suite."""


@main.command(name="run")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON run configuration; flags override file values.")
@click.option("--metric", default=None, help="Catalog metric name.")
@click.option("--n", type=int, default=None, help="Dimension.")
@click.option("--points", type=int, default=None, help="Number of sample points.")
@click.option("--seed", type=int, default=None,
              help="Seed for points and synthetic batteries.")
@click.option("--box", default=None, help="Sample box 'lo,hi'.")
@click.option("--synthetic", type=int, default=None,
              help="Synthetic battery instance count.")
@click.option("--tol", multiple=True, help="Tolerance override KEY=VALUE (repeatable).")
@click.option("--checks", default=None, help="Comma-separated check subset.")
@click.option("--jobs", type=int, default=None, help="Worker processes for points.")
@click.option("--out", type=click.Path(), default=None,
              help="Report path (default: stdout).")
@click.option("--server", default=None, help="Run via a weyl-lab service URL.")
def run_command(config_path, metric, n, points, seed, box, synthetic, tol,
                checks, jobs, out, server) -> None:
    """Execute the check battery and emit a JSON report."""
    config = _load_config(config_path, {
        "metric": metric, "n": n, "points": points, "seed": seed, "box": box,
        "synthetic": synthetic, "tol": tol, "checks": checks, "jobs": jobs,
        "out": out,
    })
    if server:
        raw = _run_remote(server, config)
        payload = json.loads(raw)
        from .models import AnalysisReport
        report = AnalysisReport.model_validate(payload)
    else:
        try:
            report = engine.run(config)
        except WeylLabError as exc:
            _fail_config(str(exc))
        raw = report_to_canonical_json(report)
    destination = config.output_path
    if destination:
        Path(destination).write_bytes(raw)
        click.echo(f"report written to {destination}", err=True)
    else:
        sys.stdout.buffer.write(raw)
        sys.stdout.flush()
    click.echo(engine.render_summary(report), err=True)
    sys.exit(engine.exit_code(report))


def _run_remote(server: str, config: RunConfig) -> bytes:
    import httpx

    url = server.rstrip("/") + "/run"
    response = httpx.post(url, json=config.model_dump(mode="json"), timeout=600.0)
    if response.status_code != 200:
        click.echo(f"server error {response.status_code}: {response.text}", err=True)
        sys.exit(CONFIG_ERROR_EXIT)
    return response.content


@main.command(name="catalog")
@click.option("--server", default=None, help="Query a running service instead.")
def catalog_command(server) -> None:
    """List catalog metrics and their parameter schemas."""
    if server:
        import httpx

        response = httpx.get(server.rstrip("/") + "/catalog", timeout=30.0)
        response.raise_for_status()
        click.echo(json.dumps(response.json(), indent=2, sort_keys=True))
        return
    listing = {
        "metrics": metrics.catalog_listing(),
        "checks": engine.CHECK_NAMES,
        "default_tolerances": engine.DEFAULT_TOLERANCES,
    }
    click.echo(json.dumps(listing, indent=2, sort_keys=True))


@main.command(name="verify")
@click.option("--report", "report_path", type=click.Path(), required=True,
              help="Path of a saved report to re-check.")
def verify_command(report_path) -> None:
    """Re-check a saved report's verdicts against its stored defects."""
    try:
        payload = json.loads(Path(report_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        _fail_config(f"cannot read {report_path}: {exc}")
    try:
        result = engine.verify_report(payload)
    except (ValueError, DomainError) as exc:
        _fail_config(f"report does not validate: {exc}")
    click.echo(json.dumps(result.model_dump(), indent=2, sort_keys=True))
    sys.exit(0 if result.consistent else CHECK_FAIL_EXIT)


@main.command(name="serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve_command(host, port) -> None:
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("weyllab.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
