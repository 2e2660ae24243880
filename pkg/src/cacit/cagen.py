"""Tuple universes, greedy covering-suite generation and brute-force verification.

Tuples are handled internally as ``(relation, values)`` where ``relation`` is a
sorted tuple of parameter indices and ``values`` the matching value indices.
Sorting these pairs gives the canonical tuple order used by the generator.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .model import CoverageRequirement, ModelError, ParameterModel, TestSuite


class TargetTuple(NamedTuple):
    relation: tuple[int, ...]
    values: tuple[int, ...]

    def bindings(self, model: ParameterModel) -> dict[int, str]:
        return {p: model[p].values[v] for p, v in zip(self.relation, self.values)}

    def describe(self, model: ParameterModel) -> str:
        return ", ".join(f"{model[p].name}={model[p].values[v]}" for p, v in zip(self.relation, self.values))


@dataclass(frozen=True)
class TupleUniverse:
    model: ParameterModel
    requirements: tuple[CoverageRequirement, ...]
    tuples: tuple[TargetTuple, ...]

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)


@dataclass(frozen=True)
class VerificationReport:
    total: int
    covered: int
    uncovered: tuple[TargetTuple, ...]

    @property
    def ok(self) -> bool:
        return not self.uncovered

    def to_dict(self, model: ParameterModel) -> dict:
        return {
            "total_tuples": self.total,
            "covered": self.covered,
            "uncovered": [
                {model[p].name: val for p, val in t.bindings(model).items()} for t in self.uncovered
            ],
        }


@dataclass(frozen=True)
class SizeComparison:
    baseline_label: str
    baseline_size: int
    candidate_label: str
    candidate_size: int

    @property
    def difference(self) -> int:
        return self.candidate_size - self.baseline_size

    def to_dict(self) -> dict:
        return {
            "baseline": {"label": self.baseline_label, "size": self.baseline_size},
            "candidate": {"label": self.candidate_label, "size": self.candidate_size},
            "difference": self.difference,
        }


def compile_requirements(
    model: ParameterModel, requirements: Sequence[CoverageRequirement]
) -> TupleUniverse:
    """Expand each ``(relation, t)`` into every value combination of every t-subset."""
    found: set[TargetTuple] = set()
    for req in requirements:
        if any(not 0 <= i < model.k for i in req.relation):
            raise ModelError(f"requirement references unknown parameter index in {sorted(req.relation)}")
        if req.strength > len(req.relation):
            raise ModelError("strength exceeds relation size")
        for subset in itertools.combinations(sorted(req.relation), req.strength):
            domains = [range(model[p].size) for p in subset]
            for values in itertools.product(*domains):
                found.add(TargetTuple(subset, values))
    return TupleUniverse(model, tuple(requirements), tuple(sorted(found)))


def generate(model: ParameterModel, universe: TupleUniverse, label: str = "") -> TestSuite:
    """Greedy one-test-at-a-time construction.

    Each row is seeded with the first uncovered tuple; remaining parameters are
    filled busiest-first, each taking the value that completes the most
    uncovered tuples (ties go to the lower index).
    """
    if not universe.tuples:
        raise ModelError("cannot generate a suite for an empty tuple universe")
    k = model.k
    uncovered: dict[tuple[int, ...], set[tuple[int, ...]]] = {}
    for rel, vals in universe.tuples:
        uncovered.setdefault(rel, set()).add(vals)
    touching: list[list[tuple[int, ...]]] = [[] for _ in range(k)]
    for rel in uncovered:
        for p in rel:
            touching[p].append(rel)

    order = universe.tuples
    cursor = 0
    remaining = len(order)
    rows: list[list[int]] = []
    while remaining:
        while order[cursor].values not in uncovered[order[cursor].relation]:
            cursor += 1
        seed = order[cursor]
        row: list[int | None] = [None] * k
        for p, v in zip(seed.relation, seed.values):
            row[p] = v

        load = [sum(len(uncovered[rel]) for rel in touching[p]) for p in range(k)]
        for p in sorted((p for p in range(k) if row[p] is None), key=lambda p: (-load[p], p)):
            best_value, best_gain = 0, -1
            for v in range(model[p].size):
                row[p] = v
                gain = 0
                for rel in touching[p]:
                    if all(row[q] is not None for q in rel):
                        if tuple(row[q] for q in rel) in uncovered[rel]:
                            gain += 1
                if gain > best_gain:
                    best_value, best_gain = v, gain
            row[p] = best_value

        for rel, vals in uncovered.items():
            hit = tuple(row[q] for q in rel)
            if hit in vals:
                vals.discard(hit)
                remaining -= 1
        rows.append(row)

    suite = TestSuite(model, label=label)
    for row in rows:
        suite.add(tuple(model[p].values[v] for p, v in enumerate(row)))
    return suite.finalize()


def verify(suite: TestSuite, universe: TupleUniverse) -> VerificationReport:
    """Exact check of which universe tuples occur in at least one row."""
    model = universe.model
    index_rows = []
    for case in suite:
        model.check_case(case)
        index_rows.append(tuple(model[p].value_index(tok) for p, tok in enumerate(case)))
    seen: dict[tuple[int, ...], set[tuple[int, ...]]] = {}
    missing = []
    for tup in universe.tuples:
        if tup.relation not in seen:
            seen[tup.relation] = {tuple(r[p] for p in tup.relation) for r in index_rows}
        if tup.values not in seen[tup.relation]:
            missing.append(tup)
    total = len(universe.tuples)
    return VerificationReport(total, total - len(missing), tuple(missing))


def suite_stats(baseline: TestSuite, candidate: TestSuite) -> SizeComparison:
    return SizeComparison(baseline.label, len(baseline), candidate.label, len(candidate))

