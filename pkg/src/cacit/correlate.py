"""Pairwise correlation of parameter impacts and mixed-strength planning.

The raw correlation of two parameters is their joint impact divided by the
product of their individual impacts. Raw ratios are unbounded, so the reported
matrix is divided by the largest off-diagonal raw value; the raw grid is kept
for audit.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .model import CoverageRequirement, ParameterModel

DEFAULT_THETA_HIGH = 0.9
DEFAULT_THETA_LOW = 0.1
NORMALIZATION_NOTE = "entries are raw impact ratios divided by the largest off-diagonal ratio"


class CorrelationError(ValueError):
    pass


def _exact(x) -> Fraction:
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    value = getattr(x, "value", x)
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    # decimal literals such as 0.12 are read as written, not as binary floats
    return Fraction(repr(float(value)))


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple[str, ...]
    values: np.ndarray  # normalized, NaN on the diagonal
    raw: np.ndarray
    scale: float | None  # divisor applied to raw; None for imported tables

    @property
    def k(self) -> int:
        return len(self.names)

    def __getitem__(self, ij) -> float:
        return float(self.values[ij])

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise CorrelationError(f"unknown parameter {name!r}") from None

    def off_diagonal(self, i: int) -> np.ndarray:
        return np.delete(self.values[i], i)

    def to_csv(self, grid: np.ndarray | None = None) -> str:
        grid = self.values if grid is None else grid
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["parameter", *self.names])
        for i, name in enumerate(self.names):
            writer.writerow([name, *("-" if i == j else f"{grid[i, j]:.6f}" for j in range(self.k))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        def rows(grid):
            return [[None if i == j else round(float(grid[i, j]), 12) for j in range(self.k)]
                    for i in range(self.k)]
        return {
            "parameters": list(self.names),
            "normalized": rows(self.values),
            "raw": rows(self.raw),
            "scale": self.scale,
            "note": NORMALIZATION_NOTE if self.scale is not None else "imported table",
        }

    @classmethod
    def from_table(cls, names: Sequence[str], grid, tol: float = 1e-9) -> "CorrelationMatrix":
        """Ingest a finished correlation table (diagonal ignored)."""
        names = tuple(names)
        k = len(names)
        arr = np.array(grid, dtype=float)
        if arr.shape != (k, k):
            raise CorrelationError(f"expected a {k}x{k} table, got shape {arr.shape}")
        np.fill_diagonal(arr, np.nan)
        off = ~np.eye(k, dtype=bool)
        if np.isnan(arr[off]).any():
            raise CorrelationError("table has missing off-diagonal entries")
        if (arr[off] < 0).any() or (arr[off] > 1).any():
            raise CorrelationError("table entries must lie in [0, 1]")
        if not np.allclose(arr[off], arr.T[off], atol=tol, rtol=0):
            i, j = np.argwhere(off & ~np.isclose(arr, arr.T, atol=tol, rtol=0))[0]
            raise CorrelationError(f"table is not symmetric at ({names[i]}, {names[j]})")
        return cls(names, arr, arr.copy(), None)

    @classmethod
    def from_csv(cls, text: str) -> "CorrelationMatrix":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if not rows:
            raise CorrelationError("empty correlation CSV")
        names = [n.strip() for n in rows[0][1:]]
        if [r[0].strip() for r in rows[1:]] != names:
            raise CorrelationError("row labels must match the column header")
        grid = []
        for r in rows[1:]:
            cells = [c.strip() for c in r[1:]]
            if len(cells) != len(names):
                raise CorrelationError(f"row {r[0]!r} has {len(cells)} cells, expected {len(names)}")
            try:
                grid.append([np.nan if c == "-" else float(c) for c in cells])
            except ValueError as exc:
                raise CorrelationError(f"row {r[0]!r}: {exc}") from None
        return cls.from_table(names, grid)


def correlation_matrix(
    singles: Sequence,
    pairs: Mapping[tuple[int, int], object],
    names: Sequence[str] | None = None,
) -> CorrelationMatrix:
    """Build the normalized matrix from single impacts and pair impacts.

    ``pairs`` is keyed by index pairs in either order. A parameter with zero
    impact gets an all-zero row and column.
    """
    k = len(singles)
    names = tuple(names) if names is not None else tuple(f"p{i}" for i in range(k))
    single = [_exact(s) for s in singles]
    joint = {}
    for (p, q), val in pairs.items():
        joint[tuple(sorted((p, q)))] = _exact(val)
    raw = np.full((k, k), np.nan)
    for i in range(k):
        for j in range(i + 1, k):
            if (i, j) not in joint:
                raise CorrelationError(f"missing pair impact for ({names[i]}, {names[j]})")
            if single[i] > 0 and single[j] > 0:
                ratio = float(joint[(i, j)] / (single[i] * single[j]))
            else:
                ratio = 0.0
            raw[i, j] = raw[j, i] = ratio
    off = ~np.eye(k, dtype=bool)
    top = float(raw[off].max()) if k > 1 else 0.0
    values = raw / top if top > 0 else np.where(off, 0.0, np.nan)
    return CorrelationMatrix(names, values, raw, top)


class Partner(NamedTuple):
    index: int
    value: float
    degenerate: bool  # row was all zeros; index is just the lowest other parameter


def partner(matrix: CorrelationMatrix, p: int) -> Partner:
    if matrix.k < 2:
        raise CorrelationError("partner needs at least two parameters")
    row = np.array(matrix.values[p], dtype=float)
    row[p] = -np.inf
    best = int(np.argmax(row))  # first maximum, so ties go to the lower index
    value = float(row[best])
    return Partner(best, value, value <= 0.0)


@dataclass(frozen=True)
class StrengthPlan:
    names: tuple[str, ...]
    t_base: int
    groups: tuple[tuple[frozenset[int], int], ...]
    dont_care: frozenset[int]
    theta_high: float
    theta_low: float

    @property
    def base_only(self) -> frozenset[int]:
        grouped = set().union(*(g for g, _ in self.groups)) if self.groups else set()
        return frozenset(range(len(self.names))) - grouped - self.dont_care

    def requirements(self) -> list[CoverageRequirement]:
        reqs = []
        base = [i for i in range(len(self.names)) if i not in self.dont_care]
        if base:
            reqs.append(CoverageRequirement(base, min(self.t_base, len(base))))
        for members, strength in self.groups:
            reqs.append(CoverageRequirement(members, strength))
        for p in sorted(self.dont_care):
            reqs.append(CoverageRequirement([p], 1))
        return reqs

    def to_dict(self) -> dict:
        n = self.names
        return {
            "parameters": list(n),
            "thresholds": {"high": self.theta_high, "low": self.theta_low},
            "t_base": self.t_base,
            "groups": [{"members": [n[i] for i in sorted(g)], "strength": s} for g, s in self.groups],
            "base_only": [n[i] for i in sorted(self.base_only)],
            "dont_care": [n[i] for i in sorted(self.dont_care)],
            "requirements": [
                {"relation": [n[i] for i in sorted(r.relation)], "strength": r.strength}
                for r in self.requirements()
            ],
            "note": NORMALIZATION_NOTE,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: Mapping) -> "StrengthPlan":
        names = tuple(doc["parameters"])
        idx = {name: i for i, name in enumerate(names)}
        try:
            groups = tuple(
                (frozenset(idx[m] for m in g["members"]), int(g["strength"])) for g in doc["groups"]
            )
            dont_care = frozenset(idx[m] for m in doc["dont_care"])
        except KeyError as exc:
            raise CorrelationError(f"plan references unknown parameter {exc.args[0]!r}") from None
        return cls(names, int(doc["t_base"]), groups, dont_care,
                   float(doc["thresholds"]["high"]), float(doc["thresholds"]["low"]))

    def check_model(self, model: ParameterModel) -> None:
        if list(self.names) != model.names:
            raise CorrelationError("plan parameters do not match the model")


def _components(k: int, edges) -> list[frozenset[int]]:
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, set[int]] = {}
    for x in range(k):
        comps.setdefault(find(x), set()).add(x)
    return sorted((frozenset(c) for c in comps.values() if len(c) > 1), key=min)


def build_plan(
    matrix: CorrelationMatrix,
    theta_high: float = DEFAULT_THETA_HIGH,
    theta_low: float = DEFAULT_THETA_LOW,
    t_base: int = 2,
    t_high: int = 3,
    full_strength: bool = False,
) -> StrengthPlan:
    """Group highly correlated parameters and mark weakly correlated ones don't-care.

    Groups are connected components of pairs at or above ``theta_high``. A
    parameter whose every entry is below ``theta_low`` only has to appear.
    """
    if not (isinstance(theta_high, Real) and isinstance(theta_low, Real)) or not 0 <= theta_low < theta_high <= 1:
        raise CorrelationError(f"thresholds must satisfy 0 <= low < high <= 1, got low={theta_low}, high={theta_high}")
    if t_base < 2:
        raise CorrelationError(f"base strength must be at least 2, got {t_base}")
    if t_high <= t_base:
        raise CorrelationError(f"high strength {t_high} must exceed base strength {t_base}")
    k = matrix.k
    vals = matrix.values
    edges = [(i, j) for i in range(k) for j in range(i + 1, k) if vals[i, j] >= theta_high]
    groups = tuple(
        (g, len(g) if full_strength else min(t_high, len(g))) for g in _components(k, edges)
    )
    dont_care = frozenset(i for i in range(k) if k > 1 and (matrix.off_diagonal(i) < theta_low).all())
    return StrengthPlan(tuple(matrix.names), t_base, groups, dont_care, float(theta_high), float(theta_low))
