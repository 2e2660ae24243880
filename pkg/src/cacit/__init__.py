"""Code-aware combinatorial interaction testing.

Measure how strongly each input parameter drives code coverage, turn pairwise
impacts into a correlation matrix, and generate mixed-strength covering
suites that put higher interaction strength where the code needs it.
"""
from importlib import resources
from pathlib import Path

from .cagen import compile_requirements, generate, suite_stats, verify
from .correlate import CorrelationMatrix, build_plan, correlation_matrix, partner
from .evaluate import compare, efficiency, load_fixture, mutation_score, run_suite
from .impact import (
    execute,
    impact_pair,
    impact_single,
    plan_experiments,
    sensitivity_report,
)
from .model import (
    CoverageRequirement,
    ParameterModel,
    TestSuite,
    exhaustive_size,
    load_model,
    uniform,
)

__version__ = "0.1.0"


def bundled(name: str) -> Path:
    """Path of a data file shipped with the package (fixtures, models, tables)."""
    path = Path(str(resources.files(__name__) / "data" / name))
    if not path.is_file():
        raise FileNotFoundError(f"no bundled file named {name!r}")
    return path
