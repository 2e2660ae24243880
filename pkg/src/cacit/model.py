"""Parameter models, test cases, suites and coverage requirements."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

DEFAULT_MAX_VALUES = 5

# A test case is a total assignment, stored positionally: case[i] is the value
# token of parameter i.
TestCase = tuple


class ModelError(ValueError):
    """Raised for malformed or invalid model documents."""


@dataclass(frozen=True)
class Parameter:
    name: str
    index: int
    values: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.values)

    def value_index(self, token: str) -> int:
        try:
            return self.values.index(token)
        except ValueError:
            raise ModelError(f"value {token!r} not in domain of parameter {self.name!r}") from None


@dataclass(frozen=True)
class ParameterModel:
    parameters: tuple[Parameter, ...]

    def __post_init__(self):
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise ModelError(f"duplicate parameter name {dup!r}")
        for i, p in enumerate(self.parameters):
            if p.index != i:
                raise ModelError(f"parameter {p.name!r} has index {p.index}, expected {i}")

    @classmethod
    def from_domains(
        cls,
        domains: Mapping[str, Sequence] | Iterable[tuple[str, Sequence]],
        max_values: int | None = DEFAULT_MAX_VALUES,
    ) -> "ParameterModel":
        """Build a validated model from ``name -> values`` pairs, in order."""
        items = domains.items() if isinstance(domains, Mapping) else domains
        params = []
        for i, (name, values) in enumerate(items):
            name = str(name)
            if not name or any(c.isspace() for c in name):
                raise ModelError(f"parameter name {name!r} must be a non-empty token")
            if values is None or isinstance(values, (str, bytes)) or not isinstance(values, Sequence):
                raise ModelError(f"parameter {name!r}: values must be a list")
            tokens = tuple(str(v) for v in values)
            if len(tokens) == 0:
                raise ModelError(f"parameter {name!r}: empty domain")
            if len(tokens) == 1:
                raise ModelError(f"parameter {name!r}: domain too small (needs at least 2 values)")
            if len(set(tokens)) != len(tokens):
                raise ModelError(f"parameter {name!r}: duplicate value tokens")
            if max_values is not None and len(tokens) > max_values:
                raise ModelError(
                    f"parameter {name!r}: domain too large ({len(tokens)} > {max_values} values)"
                )
            params.append(Parameter(name, i, tokens))
        if not params:
            raise ModelError("model has no parameters")
        return cls(tuple(params))

    @property
    def k(self) -> int:
        return len(self.parameters)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.parameters]

    @property
    def sizes(self) -> list[int]:
        return [p.size for p in self.parameters]

    def __getitem__(self, key: int | str) -> Parameter:
        if isinstance(key, str):
            return self.parameters[self.index_of(key)]
        return self.parameters[key]

    def index_of(self, name: str) -> int:
        for p in self.parameters:
            if p.name == name:
                return p.index
        raise ModelError(f"unknown parameter {name!r}")

    def as_dict(self, case: Sequence[str]) -> dict[str, str]:
        return {p.name: case[p.index] for p in self.parameters}

    def case_from_mapping(self, assignment: Mapping[str, str]) -> TestCase:
        """Convert a ``name -> token`` mapping into a positional test case."""
        extra = set(assignment) - set(self.names)
        if extra:
            raise ModelError(f"unknown parameter(s) {sorted(extra)}")
        case = []
        for p in self.parameters:
            if p.name not in assignment:
                raise ModelError(f"assignment is missing parameter {p.name!r}")
            token = str(assignment[p.name])
            p.value_index(token)
            case.append(token)
        return tuple(case)

    def check_case(self, case: Sequence[str]) -> None:
        if len(case) != self.k:
            raise ModelError(f"test case has {len(case)} cells, model has {self.k} parameters")
        for p, token in zip(self.parameters, case):
            p.value_index(token)

    def to_json(self) -> str:
        return json.dumps(model_to_dict(self), indent=2) + "\n"


def model_to_dict(model: ParameterModel) -> dict:
    return {"parameters": [{"name": p.name, "values": list(p.values)} for p in model.parameters]}


def model_from_dict(doc, max_values: int | None = DEFAULT_MAX_VALUES) -> ParameterModel:
    if not isinstance(doc, Mapping) or "parameters" not in doc:
        raise ModelError("malformed model document: expected a 'parameters' key")
    entries = doc["parameters"]
    if isinstance(entries, Mapping):
        pairs = list(entries.items())
    elif isinstance(entries, list):
        pairs = []
        for i, entry in enumerate(entries):
            if not isinstance(entry, Mapping) or "name" not in entry:
                raise ModelError(f"malformed model document: parameter #{i} has no name")
            pairs.append((entry["name"], entry.get("values")))
    else:
        raise ModelError("malformed model document: 'parameters' must be a list or mapping")
    return ParameterModel.from_domains(pairs, max_values=max_values)


def read_document(text: str):
    """Parse a YAML (or JSON) document keeping every scalar as a string.

    Value tokens are opaque, so ``on``/``off``/``0.10`` must survive verbatim.
    """
    try:
        return yaml.load(text, Loader=yaml.BaseLoader)
    except yaml.YAMLError as exc:
        raise ModelError(f"malformed document: {exc}") from None


def load_model(source, max_values: int | None = DEFAULT_MAX_VALUES) -> ParameterModel:
    """Load a model from a path, a document string, or an already parsed mapping."""
    if isinstance(source, Mapping):
        return model_from_dict(source, max_values)
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).is_file()):
        source = Path(source).read_text(encoding="utf-8")
    return model_from_dict(read_document(source), max_values)


def exhaustive_size(model: ParameterModel) -> int:
    return math.prod(model.sizes)


@dataclass
class TestSuite:
    """Ordered rows of total assignments plus a provenance label."""

    __test__ = False  # keep pytest from collecting this class

    model: ParameterModel
    cases: list[TestCase] = field(default_factory=list)
    label: str = ""

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)

    def add(self, case: Sequence[str]) -> None:
        self.model.check_case(case)
        self.cases.append(tuple(case))

    def finalize(self) -> "TestSuite":
        """Drop duplicate rows, keeping the first occurrence of each."""
        seen = set()
        unique = []
        for case in self.cases:
            if case not in seen:
                seen.add(case)
                unique.append(case)
        return TestSuite(self.model, unique, self.label)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.model.names)
        writer.writerows(self.cases)
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "label": self.label,
            "parameters": self.model.names,
            "cases": [list(case) for case in self.cases],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, model: ParameterModel, text: str) -> "TestSuite":
        doc = json.loads(text)
        if doc.get("parameters") != model.names:
            raise ModelError("suite parameters do not match the model")
        suite = cls(model, label=doc.get("label", ""))
        for row in doc["cases"]:
            suite.add(row)
        return suite

    @classmethod
    def from_csv(cls, model: ParameterModel, text: str, label: str = "") -> "TestSuite":
        rows = [row for row in csv.reader(io.StringIO(text)) if row]
        if not rows or rows[0] != model.names:
            raise ModelError("suite CSV header does not match the model")
        suite = cls(model, label=label)
        for row in rows[1:]:
            suite.add(row)
        return suite


@dataclass(frozen=True)
class CoverageRequirement:
    """Cover every ``strength``-subset of ``relation`` with all value combinations."""

    relation: frozenset[int]
    strength: int

    def __init__(self, relation: Iterable[int], strength: int):
        rel = frozenset(int(i) for i in relation)
        if not rel:
            raise ModelError("coverage requirement needs a non-empty relation")
        if not 1 <= strength <= len(rel):
            raise ModelError(
                f"strength {strength} out of range for a relation of {len(rel)} parameter(s)"
            )
        object.__setattr__(self, "relation", rel)
        object.__setattr__(self, "strength", int(strength))

    def to_dict(self, model: ParameterModel | None = None) -> dict:
        rel = sorted(self.relation)
        if model is not None:
            rel = [model[i].name for i in rel]
        return {"relation": rel, "strength": self.strength}


def uniform(model: ParameterModel, t: int) -> list[CoverageRequirement]:
    """The single requirement of a classic t-way covering array."""
    return [CoverageRequirement(range(model.k), t)]


def load_suite(path, model: ParameterModel) -> TestSuite:
    """Read a suite from ``.csv`` or ``.json``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".csv":
        return TestSuite.from_csv(model, text, label=path.stem)
    return TestSuite.from_json(model, text)
