"""Coverage experiments and parameter impact.

A *profile* pins every parameter to a constant value; single-factor runs sweep
one parameter under a profile and pair runs sweep the cross product of two.
Impact is the spread (max minus min) of coverage observed in such a sweep.

Code units are identified by positive integers ``1..total_units`` (line
numbers, typically).
"""
from __future__ import annotations

import itertools
import json
import logging
import shlex
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .model import ModelError, ParameterModel, TestCase

log = logging.getLogger(__name__)

OK = "ok"
FAILED = "execution-failed"
DEFAULT_TIMEOUT = 30.0


class AdapterError(RuntimeError):
    """The coverage adapter broke its protocol, timed out, or lacks a run."""


class ImpactError(ValueError):
    pass


@dataclass(frozen=True)
class CoverageRecord:
    covered: frozenset[int]
    total_units: int | None
    status: str = OK

    @property
    def ok(self) -> bool:
        return self.status == OK

    @property
    def fraction(self) -> Fraction:
        return Fraction(len(self.covered), self.total_units)


def make_record(total_units, covered) -> CoverageRecord:
    """Validate raw adapter output and build an ``ok`` record."""
    if isinstance(total_units, bool) or not isinstance(total_units, int) or total_units < 1:
        raise AdapterError(f"total_units must be a positive integer, got {total_units!r}")
    if not isinstance(covered, (list, tuple, set, frozenset)):
        raise AdapterError(f"covered must be a list of unit ids, got {covered!r}")
    units = set()
    for u in covered:
        if isinstance(u, bool) or not isinstance(u, int) or not 1 <= u <= total_units:
            raise AdapterError(f"unit id {u!r} outside 1..{total_units}")
        units.add(u)
    return CoverageRecord(frozenset(units), total_units)


# Adapters --------------------------------------------------------------------

Adapter = Callable[[Mapping[str, str]], CoverageRecord]


class FixtureAdapter:
    """Runs assignments against an in-process simulated SUT."""

    def __init__(self, sut):
        self.sut = sut

    def __call__(self, assignment: Mapping[str, str]) -> CoverageRecord:
        return CoverageRecord(frozenset(self.sut.coverage(assignment)), self.sut.total_units)


class ExecAdapter:
    """Launches ``command`` once per assignment.

    The assignment goes to stdin as a JSON object; the command must print
    ``{"total_units": N, "covered": [...]}`` and exit 0. A nonzero exit marks
    the run as failed.
    """

    def __init__(self, command: str | Sequence[str], timeout: float = DEFAULT_TIMEOUT, cwd=None):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self.cwd = cwd

    def __call__(self, assignment: Mapping[str, str]) -> CoverageRecord:
        payload = json.dumps(dict(assignment))
        try:
            proc = subprocess.run(
                self.argv, input=payload, capture_output=True, text=True,
                timeout=self.timeout, cwd=self.cwd,
            )
        except subprocess.TimeoutExpired:
            raise AdapterError(f"adapter timed out after {self.timeout}s on {payload}") from None
        except OSError as exc:
            raise AdapterError(f"cannot launch adapter {self.argv!r}: {exc}") from None
        if proc.returncode != 0:
            log.warning("adapter exited with %d on %s", proc.returncode, payload)
            return CoverageRecord(frozenset(), None, FAILED)
        try:
            doc = json.loads(proc.stdout)
        except json.JSONDecodeError:
            raise AdapterError(f"adapter wrote malformed JSON for {payload}: {proc.stdout[:200]!r}") from None
        if not isinstance(doc, dict) or "total_units" not in doc or "covered" not in doc:
            raise AdapterError(f"adapter response for {payload} lacks total_units/covered")
        return make_record(doc["total_units"], doc["covered"])


class ReplayAdapter:
    """Serves recorded coverage from a JSON-lines file."""

    def __init__(self, records: Mapping[tuple, CoverageRecord], model: ParameterModel):
        self.records = dict(records)
        self.model = model

    @classmethod
    def from_file(cls, path, model: ParameterModel) -> "ReplayAdapter":
        matrix = CoverageMatrix.from_jsonl(model, Path(path).read_text(encoding="utf-8"))
        return cls(matrix.entries, model)

    def __call__(self, assignment: Mapping[str, str]) -> CoverageRecord:
        case = self.model.case_from_mapping(assignment)
        try:
            return self.records[case]
        except KeyError:
            raise AdapterError(f"replay file has no record for {json.dumps(dict(assignment))}") from None


# Coverage matrix -----------------------------------------------------------------

@dataclass
class CoverageMatrix:
    model: ParameterModel
    entries: dict[TestCase, CoverageRecord] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, case) -> bool:
        return tuple(case) in self.entries

    def __getitem__(self, case) -> CoverageRecord:
        return self.entries[tuple(case)]

    def __post_init__(self):
        self.total_units: int | None = None
        entries, self.entries = self.entries, {}
        for case, rec in entries.items():
            self.add(case, rec)

    def add(self, case: TestCase, record: CoverageRecord) -> None:
        if record.ok:
            if self.total_units is None:
                self.total_units = record.total_units
            elif record.total_units != self.total_units:
                raise AdapterError(
                    f"total_units changed from {self.total_units} to {record.total_units} "
                    f"on {self.model.as_dict(case)}"
                )
        self.entries[tuple(case)] = record

    def fraction(self, case) -> Fraction:
        return self[case].fraction

    def _sort_key(self, case):
        return tuple(self.model[p].value_index(v) for p, v in enumerate(case))

    def to_jsonl(self) -> str:
        lines = []
        for case in sorted(self.entries, key=self._sort_key):
            rec = self.entries[case]
            lines.append(json.dumps({
                "assignment": self.model.as_dict(case),
                "status": rec.status,
                "total_units": rec.total_units,
                "covered": sorted(rec.covered),
            }))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, model: ParameterModel, text: str) -> "CoverageMatrix":
        matrix = cls(model)
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                case = model.case_from_mapping(doc["assignment"])
            except (json.JSONDecodeError, KeyError, TypeError, ModelError) as exc:
                raise AdapterError(f"coverage record line {lineno} is malformed: {exc}") from None
            if doc.get("status", OK) == FAILED:
                matrix.add(case, CoverageRecord(frozenset(), None, FAILED))
            else:
                matrix.add(case, make_record(doc.get("total_units"), doc.get("covered")))
        return matrix


# Experiment planning ---------------------------------------------------------

def constant_profiles(model: ParameterModel, count: int) -> list[TestCase]:
    """Profile ``r`` pins each parameter to its value at index ``min(r, size-1)``.

    Profiles that coincide after clamping are dropped.
    """
    if count < 1:
        raise ImpactError(f"profile count must be at least 1, got {count}")
    profiles: list[TestCase] = []
    for r in range(count):
        prof = tuple(p.values[min(r, p.size - 1)] for p in model.parameters)
        if prof not in profiles:
            profiles.append(prof)
    return profiles


def single_runs(model: ParameterModel, p: int, profile: TestCase) -> list[TestCase]:
    runs = []
    for v in model[p].values:
        case = list(profile)
        case[p] = v
        runs.append(tuple(case))
    return runs


def pair_runs(model: ParameterModel, p: int, q: int, profile: TestCase) -> list[TestCase]:
    runs = []
    for vp, vq in itertools.product(model[p].values, model[q].values):
        case = list(profile)
        case[p], case[q] = vp, vq
        runs.append(tuple(case))
    return runs


@dataclass(frozen=True)
class ExperimentPlan:
    model: ParameterModel
    profiles: tuple[TestCase, ...]
    singles: dict  # (p, profile index) -> runs in value order
    pairs: dict  # (p, q, profile index) -> runs in cross-product order

    @property
    def planned_single(self) -> int:
        return sum(len(r) for r in self.singles.values())

    @property
    def planned_pair(self) -> int:
        return sum(len(r) for r in self.pairs.values())

    @property
    def assignments(self) -> list[TestCase]:
        """Unique assignments, in first-planned order."""
        seen: dict[TestCase, None] = {}
        for runs in itertools.chain(self.singles.values(), self.pairs.values()):
            for case in runs:
                seen.setdefault(case, None)
        return list(seen)


def plan_experiments(model: ParameterModel, profile_count: int = 2) -> ExperimentPlan:
    profiles = constant_profiles(model, profile_count)
    singles, pairs = {}, {}
    for r, prof in enumerate(profiles):
        for p in range(model.k):
            singles[(p, r)] = single_runs(model, p, prof)
    for r, prof in enumerate(profiles):
        for p, q in itertools.combinations(range(model.k), 2):
            pairs[(p, q, r)] = pair_runs(model, p, q, prof)
    return ExperimentPlan(model, tuple(profiles), singles, pairs)


def execute(
    plan: ExperimentPlan,
    adapter: Adapter,
    workers: int = 1,
    cache: CoverageMatrix | None = None,
) -> CoverageMatrix:
    """Run every unique planned assignment once and collect a coverage matrix.

    Assignments already present in ``cache`` are not re-executed.
    """
    if not plan.assignments:
        raise ImpactError("experiment plan is empty")
    model = plan.model
    matrix = CoverageMatrix(model, dict(cache.entries) if cache is not None else {})
    todo = [case for case in plan.assignments if case not in matrix]
    lock = threading.Lock()

    def run(case: TestCase) -> None:
        record = adapter(model.as_dict(case))
        if not isinstance(record, CoverageRecord):
            raise AdapterError(f"adapter returned {type(record).__name__}, expected CoverageRecord")
        with lock:
            matrix.add(case, record)

    if workers <= 1:
        for case in todo:
            run(case)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(run, case) for case in todo]:
                fut.result()
    # re-insert in plan order so iteration order never depends on scheduling
    ordered = {case: matrix.entries[case] for case in plan.assignments}
    for case, rec in matrix.entries.items():
        ordered.setdefault(case, rec)
    matrix.entries = ordered
    return matrix


# Impact ----------------------------------------------------------------------

@dataclass(frozen=True)
class Impact:
    subject: tuple[int, ...]
    value: Fraction

    def __float__(self) -> float:
        return float(self.value)


def _spread(matrix: CoverageMatrix, runs: Iterable[TestCase]) -> Fraction | None:
    values = []
    for case in runs:
        if case not in matrix:
            raise ImpactError(f"coverage matrix lacks run {matrix.model.as_dict(case)}")
        rec = matrix[case]
        if not rec.ok:
            log.warning("ignoring failed run %s", matrix.model.as_dict(case))
            continue
        values.append(rec.fraction)
    if len(values) < 2:
        return None
    return max(values) - min(values)


def _impact(matrix: CoverageMatrix, groups: list[list[TestCase]], mode: str, subject) -> Impact:
    if mode == "global":
        groups = [[case for g in groups for case in g]]
    elif mode != "profile":
        raise ImpactError(f"unknown impact mode {mode!r}")
    spreads = [s for s in (_spread(matrix, g) for g in groups) if s is not None]
    if not spreads:
        names = [matrix.model[i].name for i in subject]
        raise ImpactError(f"not enough successful runs to compute the impact of {names}")
    return Impact(tuple(subject), max(spreads))


def impact_single(matrix: CoverageMatrix, p: int, profile_count: int = 2, mode: str = "profile") -> Impact:
    model = matrix.model
    groups = [single_runs(model, p, prof) for prof in constant_profiles(model, profile_count)]
    return _impact(matrix, groups, mode, (p,))


def impact_pair(
    matrix: CoverageMatrix, p: int, q: int, profile_count: int = 2, mode: str = "profile"
) -> Impact:
    if p == q:
        raise ImpactError("pair impact needs two distinct parameters")
    p, q = sorted((p, q))
    model = matrix.model
    groups = [pair_runs(model, p, q, prof) for prof in constant_profiles(model, profile_count)]
    return _impact(matrix, groups, mode, (p, q))


def all_impacts(matrix: CoverageMatrix, profile_count: int = 2, mode: str = "profile"):
    """Single impacts as a list, pair impacts keyed by ``(p, q)`` with ``p < q``."""
    k = matrix.model.k
    singles = [impact_single(matrix, p, profile_count, mode) for p in range(k)]
    pairs = {
        (p, q): impact_pair(matrix, p, q, profile_count, mode)
        for p, q in itertools.combinations(range(k), 2)
    }
    return singles, pairs


# Sensitivity -------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityReport:
    model: ParameterModel
    total_units: int
    sensitive: tuple[frozenset[int], ...]
    exclusive: tuple[frozenset[int], ...]
    never_covered: frozenset[int]

    def fraction(self, units: Iterable[int]) -> Fraction:
        return Fraction(len(set(units)), self.total_units)

    def to_dict(self) -> dict:
        rows = []
        for p in self.model.parameters:
            rows.append({
                "parameter": p.name,
                "sensitive": sorted(self.sensitive[p.index]),
                "sensitive_fraction": float(self.fraction(self.sensitive[p.index])),
                "exclusive": sorted(self.exclusive[p.index]),
                "exclusive_fraction": float(self.fraction(self.exclusive[p.index])),
            })
        return {
            "total_units": self.total_units,
            "parameters": rows,
            "never_covered": sorted(self.never_covered),
            "never_covered_fraction": float(self.fraction(self.never_covered)),
        }


def sensitivity_report(matrix: CoverageMatrix, model: ParameterModel | None = None) -> SensitivityReport:
    """Units whose execution flips between runs differing only in one parameter."""
    model = model or matrix.model
    total = matrix.total_units
    if total is None:
        raise ImpactError("coverage matrix holds no successful runs")
    ok = {case: rec.covered for case, rec in matrix.entries.items() if rec.ok}
    sensitive = []
    for p in range(model.k):
        groups: dict[tuple, list[frozenset[int]]] = {}
        for case, covered in ok.items():
            groups.setdefault(case[:p] + case[p + 1:], []).append(covered)
        units: set[int] = set()
        for members in groups.values():
            if len(members) > 1:
                units |= frozenset.union(*members) - frozenset.intersection(*members)
        sensitive.append(frozenset(units))
    exclusive = []
    for p in range(model.k):
        others = set().union(*(sensitive[q] for q in range(model.k) if q != p))
        exclusive.append(sensitive[p] - others)
    ever = set().union(*ok.values()) if ok else set()
    never = frozenset(range(1, total + 1)) - ever
    return SensitivityReport(model, total, tuple(sensitive), tuple(exclusive), never)
