"""Simulated systems under test, declarative fault models and mutation scoring."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .guards import Guard, GuardError
from .model import ModelError, ParameterModel, TestSuite, model_from_dict, read_document


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    lines: frozenset[int]
    guard: Guard


@dataclass(frozen=True)
class SimulatedSut:
    """Coverage is the union of the lines of every block whose guard holds."""

    model: ParameterModel
    total_units: int
    blocks: tuple[Block, ...]

    def __post_init__(self):
        if self.total_units < 1:
            raise ModelError("total_units must be positive")
        for b in self.blocks:
            bad = [u for u in b.lines if not 1 <= u <= self.total_units]
            if bad:
                raise ModelError(f"block {b.guard.text!r} has lines outside 1..{self.total_units}: {bad}")

    def coverage(self, assignment: Mapping[str, str]) -> frozenset[int]:
        covered: set[int] = set()
        for b in self.blocks:
            if b.guard(assignment):
                covered |= b.lines
        return frozenset(covered)


@dataclass(frozen=True)
class Mutant:
    id: str
    type: str
    kill: Guard


@dataclass(frozen=True)
class FaultModel:
    mutants: tuple[Mutant, ...]

    def __post_init__(self):
        ids = [m.id for m in self.mutants]
        if len(set(ids)) != len(ids):
            raise ModelError("mutant ids must be unique")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.mutants)

    def __len__(self) -> int:
        return len(self.mutants)


@dataclass(frozen=True)
class Fixture:
    name: str
    model: ParameterModel
    sut: SimulatedSut
    faults: FaultModel


def _lines(raw) -> frozenset[int]:
    """Accept ``[2, 3, "10-14"]`` style line lists."""
    if isinstance(raw, (str, int)):
        raw = [raw]
    out: set[int] = set()
    for item in raw:
        text = str(item).strip()
        try:
            if "-" in text:
                lo, hi = (int(x) for x in text.split("-", 1))
                out.update(range(lo, hi + 1))
            else:
                out.add(int(text))
        except ValueError:
            raise ModelError(f"bad line specification {item!r}") from None
    return frozenset(out)


def fixture_from_dict(doc: Mapping, max_values: int | None = 5) -> Fixture:
    model = model_from_dict(doc, max_values)
    names = model.names
    try:
        sut_doc = doc["sut"]
        total = int(sut_doc["total_units"])
        blocks = tuple(
            Block(_lines(b["lines"]), Guard(b["guard"], names)) for b in sut_doc.get("blocks", [])
        )
        mutants = tuple(
            Mutant(str(m["id"]), str(m.get("type", "")), Guard(m["kill"], names, allow_covered=True))
            for m in doc.get("faults", [])
        )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed fixture document: missing {exc}") from None
    except GuardError as exc:
        raise ModelError(str(exc)) from None
    return Fixture(str(doc.get("name", "")), model, SimulatedSut(model, total, blocks), FaultModel(mutants))


def load_fixture(source) -> Fixture:
    if isinstance(source, Mapping):
        return fixture_from_dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        source = Path(source).read_text(encoding="utf-8")
    return fixture_from_dict(read_document(source))


def _check_suite(suite: TestSuite, model: ParameterModel) -> None:
    if suite.model.names != model.names:
        raise EvaluationError("suite parameters do not match the fixture model")


def run_suite(suite: TestSuite, sut: SimulatedSut) -> list[frozenset[int]]:
    """Coverage of every case, in suite order."""
    _check_suite(suite, sut.model)
    return [sut.coverage(suite.model.as_dict(case)) for case in suite]


@dataclass(frozen=True)
class EvaluationReport:
    label: str
    suite_size: int
    mutant_ids: tuple[str, ...]
    kills: tuple[bool, ...]
    mutant_types: tuple[str, ...] = ()

    @property
    def total(self) -> int:
        return len(self.mutant_ids)

    @property
    def killed(self) -> int:
        return sum(self.kills)

    @property
    def killed_ids(self) -> tuple[str, ...]:
        return tuple(m for m, k in zip(self.mutant_ids, self.kills) if k)

    @property
    def score(self) -> Fraction:
        return Fraction(self.killed, self.total) if self.total else Fraction(0)

    @property
    def efficiency(self) -> float:
        return efficiency(self)

    def alive_by_type(self) -> dict[str, int]:
        return dict(sorted(Counter(t for t, k in zip(self.mutant_types, self.kills) if not k).items()))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "suite_size": self.suite_size,
            "mutants": self.total,
            "killed": self.killed,
            "score": round(float(self.score), 6),
            "efficiency": round(self.efficiency, 6) if self.suite_size else None,
            "killed_ids": list(self.killed_ids),
            "alive_by_type": self.alive_by_type(),
        }


def mutation_score(
    suite: TestSuite, faults: FaultModel, sut: SimulatedSut, label: str | None = None
) -> EvaluationReport:
    """A mutant dies when its kill guard holds for at least one case."""
    log = run_suite(suite, sut)
    kills = []
    for m in faults.mutants:
        kills.append(any(m.kill(suite.model.as_dict(case), cov) for case, cov in zip(suite, log)))
    return EvaluationReport(
        suite.label if label is None else label,
        len(suite),
        faults.ids,
        tuple(kills),
        tuple(m.type for m in faults.mutants),
    )


def efficiency(report: EvaluationReport) -> float:
    """Killed mutants per test case."""
    if report.suite_size <= 0:
        raise EvaluationError("efficiency is undefined for an empty suite")
    return report.killed / report.suite_size


@dataclass(frozen=True)
class Comparison:
    baseline: EvaluationReport
    candidate: EvaluationReport

    @property
    def delta_killed(self) -> int:
        return self.candidate.killed - self.baseline.killed

    @property
    def newly_killed(self) -> tuple[str, ...]:
        base = set(self.baseline.killed_ids)
        return tuple(m for m in self.candidate.killed_ids if m not in base)

    @property
    def lost(self) -> tuple[str, ...]:
        cand = set(self.candidate.killed_ids)
        return tuple(m for m in self.baseline.killed_ids if m not in cand)

    @property
    def relative_efficiency_change(self) -> float | None:
        eb, ec = efficiency(self.baseline), efficiency(self.candidate)
        if eb == 0:
            return 0.0 if ec == 0 else None
        return (ec - eb) / eb

    def to_dict(self) -> dict:
        rel = self.relative_efficiency_change
        return {
            "baseline": self.baseline.to_dict(),
            "candidate": self.candidate.to_dict(),
            "delta_killed": self.delta_killed,
            "newly_killed": list(self.newly_killed),
            "lost": list(self.lost),
            "relative_efficiency_change": None if rel is None else round(rel, 6),
        }


def compare(baseline: EvaluationReport, candidate: EvaluationReport) -> Comparison:
    if baseline.mutant_ids != candidate.mutant_ids:
        raise EvaluationError("reports were produced against different fault models")
    return Comparison(baseline, candidate)


def render_text(cmp: Comparison) -> str:
    """Plain-text summary: score and efficiency arithmetic for both suites."""
    lines = [f"{'suite':<24} {'tests':>6} {'killed':>7} {'score':>18} {'efficiency':>18}"]
    for rep in (cmp.baseline, cmp.candidate):
        score = f"{rep.killed}/{rep.total} = {float(rep.score):.0%}"
        eff = f"{rep.killed}/{rep.suite_size} = {rep.efficiency:.2f}" if rep.suite_size else "n/a"
        lines.append(f"{rep.label:<24} {rep.suite_size:>6} {rep.killed:>7} {score:>18} {eff:>18}")
    rel = cmp.relative_efficiency_change
    lines.append("")
    lines.append(f"killed delta:               {cmp.delta_killed:+d}")
    lines.append(f"newly killed:               {', '.join(cmp.newly_killed) or '-'}")
    lines.append(f"lost:                       {', '.join(cmp.lost) or '-'}")
    lines.append(
        "relative efficiency change: "
        + ("undefined" if rel is None else f"{rel:+.1%}")
    )
    return "\n".join(lines) + "\n"


def comparison_json(cmp: Comparison) -> str:
    return json.dumps(cmp.to_dict(), indent=2) + "\n"


def synthetic_report(label: str, killed: int, total: int, suite_size: int) -> EvaluationReport:
    """A report over ``total`` anonymous mutants, the first ``killed`` of them dead."""
    if not 0 <= killed <= total:
        raise EvaluationError("killed must lie between 0 and total")
    ids = tuple(f"m{i}" for i in range(total))
    return EvaluationReport(label, suite_size, ids, tuple(i < killed for i in range(total)))

