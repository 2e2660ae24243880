"""Command line entry point (``cacit``).

Exit codes: 0 success, 1 validation error, 2 adapter/protocol error,
3 internal invariant violation.
"""
from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path

import click

from . import pipeline
from .correlate import CorrelationError
from .evaluate import EvaluationError
from .guards import GuardError
from .impact import AdapterError, ImpactError
from .model import ModelError

EXIT_VALIDATION = 1
EXIT_ADAPTER = 2
EXIT_INTERNAL = 3

_VALIDATION = (pipeline.ConfigError, ModelError, CorrelationError, EvaluationError, ImpactError, GuardError)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AdapterError as exc:
            click.echo(f"adapter error: {exc}", err=True)
            sys.exit(EXIT_ADAPTER)
        except pipeline.InvariantError as exc:
            click.echo(f"internal error: {exc}", err=True)
            sys.exit(EXIT_INTERNAL)
        except _VALIDATION as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
    return wrapper


config_option = click.option(
    "--config", "-c", "config_path", required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Pipeline config (YAML or JSON).",
)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log adapter warnings.")
def cli(verbose: bool) -> None:
    """Code-aware combinatorial interaction testing."""
    logging.basicConfig(level=logging.INFO if verbose else logging.ERROR, format="%(levelname)s %(message)s")


@cli.command()
@config_option
@_guarded
def analyze(config_path: Path) -> None:
    """Measure coverage per assignment and compute parameter impacts."""
    cfg = pipeline.load_config(config_path)
    doc = pipeline.run_analyze(cfg)
    for s in doc["singles"]:
        click.echo(f"{s['parameter']}\t{s['value']:.4f}")


@cli.command()
@config_option
@click.option("--import-matrix", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Use a finished correlation table (CSV) instead of measured impacts.")
@_guarded
def plan(config_path: Path, import_matrix: Path | None) -> None:
    """Build the correlation matrix and the mixed-strength plan."""
    cfg = pipeline.load_config(config_path)
    result = pipeline.run_plan(cfg, import_matrix)
    click.echo(result.to_json(), nl=False)


@cli.command()
@config_option
@click.option("--uniform", "uniform_t", type=click.IntRange(1), default=None,
              help="Generate a uniform t-way suite instead of the planned mixed one.")
@_guarded
def generate(config_path: Path, uniform_t: int | None) -> None:
    """Generate and verify a covering suite."""
    cfg = pipeline.load_config(config_path)
    suite = pipeline.run_generate(cfg, uniform_t)
    click.echo(f"{suite.label}: {len(suite)} test cases")


@cli.command()
@config_option
@click.argument("suite_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--uniform", "uniform_t", type=click.IntRange(1), default=None,
              help="Check against a uniform t-way requirement instead of the plan.")
@_guarded
def verify(config_path: Path, suite_path: Path, uniform_t: int | None) -> None:
    """Check a suite file against the plan (or a uniform strength)."""
    cfg = pipeline.load_config(config_path)
    report = pipeline.run_verify(cfg, suite_path, uniform_t)
    click.echo(json.dumps(report.to_dict(cfg.load_model()), indent=2))
    if not report.ok:
        sys.exit(EXIT_VALIDATION)


@cli.command()
@config_option
@click.option("--baseline", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--candidate", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@_guarded
def evaluate(config_path: Path, baseline: Path | None, candidate: Path | None) -> None:
    """Score baseline and candidate suites against the fixture's mutants."""
    cfg = pipeline.load_config(config_path)
    pipeline.run_evaluate(cfg, baseline, candidate)
    click.echo((cfg.output / pipeline.EVALUATION_TXT).read_text(encoding="utf-8"), nl=False)


@cli.command()
@config_option
@_guarded
def report(config_path: Path) -> None:
    """Summarize whatever artifacts exist in the output directory."""
    cfg = pipeline.load_config(config_path)
    click.echo(pipeline.run_report(cfg), nl=False)


@cli.command("pipeline")
@config_option
@_guarded
def pipeline_cmd(config_path: Path) -> None:
    """Run every stage in order."""
    cfg = pipeline.load_config(config_path)
    click.echo(pipeline.run_pipeline(cfg), nl=False)


def main() -> None:  # pragma: no cover
    cli()


if __name__ == "__main__":  # pragma: no cover
    main()
