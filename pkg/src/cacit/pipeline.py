"""Staged analysis pipeline: analyze -> plan -> generate -> evaluate -> report.

Every stage reads and writes plain files in the output directory so that each
step can be re-run or inspected on its own.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import yaml

from . import cagen, correlate, evaluate, impact
from .model import DEFAULT_MAX_VALUES, ParameterModel, TestSuite, load_model, load_suite, uniform

COVERAGE = "coverage.jsonl"
IMPACTS = "impacts.json"
SENSITIVITY = "sensitivity.json"
CORRELATION_CSV = "correlation.csv"
CORRELATION_JSON = "correlation.json"
PLAN = "plan.json"
SIZES = "sizes.json"
EVALUATION_JSON = "evaluation.json"
EVALUATION_TXT = "evaluation.txt"
REPORT = "report.txt"
MIXED_LABEL = "code-aware-mixed"


class ConfigError(ValueError):
    pass


class InvariantError(RuntimeError):
    """A generated artifact failed its own postcondition."""


def uniform_label(t: int) -> str:
    return f"uniform-{t}way"


@dataclass
class PipelineConfig:
    output: Path
    model_path: Path | None = None
    fixture: Path | None = None
    exec_command: str | None = None
    replay: Path | None = None
    profiles: int = 2
    mode: str = "profile"
    timeout: float = impact.DEFAULT_TIMEOUT
    workers: int = 1
    theta_high: float = correlate.DEFAULT_THETA_HIGH
    theta_low: float = correlate.DEFAULT_THETA_LOW
    t_base: int = 2
    t_high: int = 3
    full_strength: bool = False
    max_values: int | None = DEFAULT_MAX_VALUES
    evaluation_fixture: Path | None = None
    base_dir: Path = field(default_factory=Path.cwd)

    def validate(self) -> "PipelineConfig":
        sources = [s for s in (self.fixture, self.exec_command, self.replay) if s is not None]
        if len(sources) != 1:
            raise ConfigError("configure exactly one adapter source: fixture, exec or replay")
        if self.model_path is None and self.fixture is None:
            raise ConfigError("a model path is required unless the adapter is a fixture")
        for label, path in (("model", self.model_path), ("fixture", self.fixture),
                            ("replay", self.replay), ("evaluation fixture", self.evaluation_fixture)):
            if path is not None and not path.is_file():
                raise ConfigError(f"{label} file not found: {path}")
        _check_int("impact.profiles", self.profiles, 1)
        _check_int("impact.workers", self.workers, 1)
        if self.mode not in ("profile", "global"):
            raise ConfigError(f"impact.mode must be 'profile' or 'global', got {self.mode!r}")
        if isinstance(self.timeout, bool) or not isinstance(self.timeout, (int, float)) or self.timeout <= 0:
            raise ConfigError(f"impact.timeout must be a positive number, got {self.timeout!r}")
        for name in ("theta_high", "theta_low"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"correlation.{name} must be a number, got {v!r}")
        if not 0 <= self.theta_low < self.theta_high <= 1:
            raise ConfigError(
                f"thresholds must satisfy 0 <= theta_low < theta_high <= 1 "
                f"(got {self.theta_low}, {self.theta_high})"
            )
        _check_int("strength.base", self.t_base, 2)
        _check_int("strength.high", self.t_high, self.t_base + 1)
        if self.max_values is not None:
            _check_int("max_values", self.max_values, 2)
        return self

    def load_model(self) -> ParameterModel:
        return load_model(self.model_path or self.fixture, max_values=self.max_values)

    def adapter(self, model: ParameterModel):
        if self.fixture is not None:
            fx = evaluate.load_fixture(self.fixture)
            if fx.model.names != model.names:
                raise ConfigError("fixture parameters do not match the model")
            return impact.FixtureAdapter(fx.sut)
        if self.replay is not None:
            return impact.ReplayAdapter.from_file(self.replay, model)
        return impact.ExecAdapter(self.exec_command, timeout=self.timeout, cwd=self.base_dir)

    @property
    def fixture_for_evaluation(self) -> Path | None:
        return self.evaluation_fixture or self.fixture


def _check_int(name: str, value: Any, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")


def config_from_dict(doc: Mapping, base_dir: Path | str = ".") -> PipelineConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("config must be a mapping")
    base = Path(base_dir)
    known = {"model", "adapter", "impact", "correlation", "strength", "output", "max_values", "evaluate"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def path(value):
        return None if value is None else base / str(value)

    adapter = doc.get("adapter") or {}
    imp = doc.get("impact") or {}
    cor = doc.get("correlation") or {}
    strength = doc.get("strength") or {}
    ev = doc.get("evaluate") or {}
    for section, value in (("adapter", adapter), ("impact", imp), ("correlation", cor),
                           ("strength", strength), ("evaluate", ev)):
        if not isinstance(value, Mapping):
            raise ConfigError(f"config section {section!r} must be a mapping")
    cfg = PipelineConfig(
        output=base / str(doc.get("output", "out")),
        model_path=path(doc.get("model")),
        fixture=path(adapter.get("fixture")),
        exec_command=adapter.get("exec"),
        replay=path(adapter.get("replay")),
        profiles=imp.get("profiles", 2),
        mode=imp.get("mode", "profile"),
        timeout=imp.get("timeout", impact.DEFAULT_TIMEOUT),
        workers=imp.get("workers", 1),
        theta_high=cor.get("theta_high", correlate.DEFAULT_THETA_HIGH),
        theta_low=cor.get("theta_low", correlate.DEFAULT_THETA_LOW),
        t_base=strength.get("base", 2),
        t_high=strength.get("high", 3),
        full_strength=bool(strength.get("full", False)),
        max_values=doc.get("max_values", DEFAULT_MAX_VALUES),
        evaluation_fixture=path(ev.get("fixture")),
        base_dir=base,
    )
    return cfg.validate()


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return config_from_dict(doc or {}, path.parent)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    target = out / name
    target.write_text(text, encoding="utf-8")
    return target


def _read_json(out: Path, name: str, stage: str):
    target = out / name
    if not target.is_file():
        raise ConfigError(f"{target} is missing; run '{stage}' first")
    return json.loads(target.read_text(encoding="utf-8"))


# Stages ----------------------------------------------------------------------

def run_analyze(cfg: PipelineConfig) -> dict:
    model = cfg.load_model()
    adapter = cfg.adapter(model)
    plan = impact.plan_experiments(model, cfg.profiles)
    matrix = impact.execute(plan, adapter, workers=cfg.workers)
    singles, pairs = impact.all_impacts(matrix, cfg.profiles, cfg.mode)
    sens = impact.sensitivity_report(matrix, model)
    names = model.names
    impacts_doc = {
        "profiles": cfg.profiles,
        "mode": cfg.mode,
        "planned_runs": {"single": plan.planned_single, "pair": plan.planned_pair,
                         "unique": len(plan.assignments)},
        "singles": [
            {"parameter": names[i.subject[0]], "impact": str(i.value), "value": round(float(i), 6)}
            for i in singles
        ],
        "pairs": [
            {"parameters": [names[p], names[q]], "impact": str(i.value), "value": round(float(i), 6)}
            for (p, q), i in pairs.items()
        ],
    }
    _write(cfg.output, COVERAGE, matrix.to_jsonl())
    _write(cfg.output, IMPACTS, _dump(impacts_doc))
    _write(cfg.output, SENSITIVITY, _dump(sens.to_dict()))
    return impacts_doc


def read_impacts(doc: Mapping, model: ParameterModel):
    names = model.names
    try:
        singles_by_name = {s["parameter"]: Fraction(s["impact"]) for s in doc["singles"]}
        singles = [singles_by_name[n] for n in names]
        pairs = {}
        for entry in doc["pairs"]:
            a, b = entry["parameters"]
            pairs[(names.index(a), names.index(b))] = Fraction(entry["impact"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"impacts file is incomplete or malformed: {exc}") from None
    return singles, pairs


def run_plan(cfg: PipelineConfig, import_matrix: Path | None = None) -> correlate.StrengthPlan:
    model = cfg.load_model()
    if import_matrix is not None:
        matrix = correlate.CorrelationMatrix.from_csv(Path(import_matrix).read_text(encoding="utf-8"))
        if list(matrix.names) != model.names:
            raise ConfigError("imported matrix parameters do not match the model")
    else:
        singles, pairs = read_impacts(_read_json(cfg.output, IMPACTS, "analyze"), model)
        matrix = correlate.correlation_matrix(singles, pairs, model.names)
    plan = correlate.build_plan(
        matrix, cfg.theta_high, cfg.theta_low, cfg.t_base, cfg.t_high, cfg.full_strength
    )
    partners = {}
    for i, name in enumerate(model.names):
        pt = correlate.partner(matrix, i)
        partners[name] = {"partner": model.names[pt.index], "value": round(pt.value, 6),
                          "degenerate": pt.degenerate}
    cor_doc = matrix.to_dict()
    cor_doc["partners"] = partners
    _write(cfg.output, CORRELATION_CSV, matrix.to_csv())
    _write(cfg.output, CORRELATION_JSON, _dump(cor_doc))
    _write(cfg.output, PLAN, plan.to_json())
    return plan


def read_plan(cfg: PipelineConfig, model: ParameterModel) -> correlate.StrengthPlan:
    plan = correlate.StrengthPlan.from_dict(_read_json(cfg.output, PLAN, "plan"))
    plan.check_model(model)
    return plan


def _suite_files(label: str) -> tuple[str, str, str]:
    return f"suite-{label}.csv", f"suite-{label}.json", f"verify-{label}.json"


def build_suite(model: ParameterModel, requirements, label: str):
    universe = cagen.compile_requirements(model, requirements)
    suite = cagen.generate(model, universe, label)
    report = cagen.verify(suite, universe)
    if not report.ok:
        raise InvariantError(f"generated suite {label!r} misses {len(report.uncovered)} tuples")
    return suite, report


def run_generate(cfg: PipelineConfig, uniform_t: int | None = None) -> TestSuite:
    model = cfg.load_model()
    if uniform_t is not None:
        label = uniform_label(uniform_t)
        requirements = uniform(model, uniform_t)
    else:
        label = MIXED_LABEL
        requirements = read_plan(cfg, model).requirements()
    suite, report = build_suite(model, requirements, label)
    csv_name, json_name, verify_name = _suite_files(label)
    _write(cfg.output, csv_name, suite.to_csv())
    _write(cfg.output, json_name, suite.to_json())
    _write(cfg.output, verify_name, _dump(report.to_dict(model)))
    _write_sizes(cfg)
    return suite


def _write_sizes(cfg: PipelineConfig) -> None:
    base = cfg.output / _suite_files(uniform_label(cfg.t_base))[1]
    mixed = cfg.output / _suite_files(MIXED_LABEL)[1]
    if base.is_file() and mixed.is_file():
        model = cfg.load_model()
        cmp = cagen.suite_stats(
            TestSuite.from_json(model, base.read_text(encoding="utf-8")),
            TestSuite.from_json(model, mixed.read_text(encoding="utf-8")),
        )
        _write(cfg.output, SIZES, _dump(cmp.to_dict()))


def run_verify(cfg: PipelineConfig, suite_path: Path, uniform_t: int | None = None):
    model = cfg.load_model()
    suite = load_suite(suite_path, model)
    if uniform_t is not None:
        requirements = uniform(model, uniform_t)
    else:
        requirements = read_plan(cfg, model).requirements()
    universe = cagen.compile_requirements(model, requirements)
    return cagen.verify(suite, universe)


def run_evaluate(cfg: PipelineConfig, baseline: Path | None = None, candidate: Path | None = None):
    fixture_path = cfg.fixture_for_evaluation
    if fixture_path is None:
        raise ConfigError("evaluation needs a fixture (adapter.fixture or evaluate.fixture)")
    model = cfg.load_model()
    fx = evaluate.load_fixture(fixture_path)
    if fx.model.names != model.names:
        raise evaluate.EvaluationError("fixture parameters do not match the model")
    baseline = baseline or cfg.output / _suite_files(uniform_label(cfg.t_base))[1]
    candidate = candidate or cfg.output / _suite_files(MIXED_LABEL)[1]
    for p in (baseline, candidate):
        if not Path(p).is_file():
            raise ConfigError(f"suite file not found: {p}; run 'generate' first")
    reports = []
    for p in (baseline, candidate):
        suite = load_suite(p, model)
        reports.append(evaluate.mutation_score(suite, fx.faults, fx.sut))
    cmp = evaluate.compare(*reports)
    _write(cfg.output, EVALUATION_JSON, evaluate.comparison_json(cmp))
    _write(cfg.output, EVALUATION_TXT, evaluate.render_text(cmp))
    return cmp


def run_report(cfg: PipelineConfig) -> str:
    out = cfg.output
    sections = []
    if (out / IMPACTS).is_file():
        doc = json.loads((out / IMPACTS).read_text(encoding="utf-8"))
        lines = [f"Parameter impact (mode={doc['mode']}, profiles={doc['profiles']})"]
        lines += [f"  {s['parameter']:<24} {s['value']:.4f}" for s in doc["singles"]]
        sections.append("\n".join(lines))
    if (out / SENSITIVITY).is_file():
        doc = json.loads((out / SENSITIVITY).read_text(encoding="utf-8"))
        lines = [f"Coverage sensitivity ({doc['total_units']} units)",
                 f"  {'parameter':<24} {'sensitive':>10} {'exclusive':>10}"]
        lines += [f"  {r['parameter']:<24} {r['sensitive_fraction']:>10.2%} {r['exclusive_fraction']:>10.2%}"
                  for r in doc["parameters"]]
        lines.append(f"  never covered: {doc['never_covered_fraction']:.2%}")
        sections.append("\n".join(lines))
    if (out / CORRELATION_CSV).is_file():
        sections.append("Correlation (normalized)\n" + (out / CORRELATION_CSV).read_text(encoding="utf-8").rstrip())
    if (out / PLAN).is_file():
        doc = json.loads((out / PLAN).read_text(encoding="utf-8"))
        lines = [f"Strength plan (theta_high={doc['thresholds']['high']}, theta_low={doc['thresholds']['low']})"]
        lines += [f"  group {', '.join(g['members'])} at t={g['strength']}" for g in doc["groups"]]
        lines.append(f"  base only: {', '.join(doc['base_only']) or '-'}")
        lines.append(f"  don't care: {', '.join(doc['dont_care']) or '-'}")
        sections.append("\n".join(lines))
    if (out / SIZES).is_file():
        doc = json.loads((out / SIZES).read_text(encoding="utf-8"))
        sections.append(
            "Suite sizes\n"
            f"  {doc['baseline']['label']:<24} {doc['baseline']['size']}\n"
            f"  {doc['candidate']['label']:<24} {doc['candidate']['size']}\n"
            f"  difference {doc['difference']:+d}"
        )
    if (out / EVALUATION_TXT).is_file():
        sections.append("Fault detection\n" + (out / EVALUATION_TXT).read_text(encoding="utf-8").rstrip())
    if not sections:
        raise ConfigError(f"nothing to report in {out}")
    text = "\n\n".join(sections) + "\n"
    _write(out, REPORT, text)
    return text


def run_pipeline(cfg: PipelineConfig) -> str:
    run_analyze(cfg)
    run_plan(cfg)
    run_generate(cfg, uniform_t=cfg.t_base)
    run_generate(cfg)
    if cfg.fixture_for_evaluation is not None:
        run_evaluate(cfg)
    return run_report(cfg)
