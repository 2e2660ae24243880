import itertools
import json

import pytest
from hypothesis import given, strategies as st

from cacit import bundled
from cacit.model import (
    CoverageRequirement,
    ModelError,
    ParameterModel,
    TestSuite,
    exhaustive_size,
    load_model,
    model_from_dict,
    read_document,
    uniform,
)


def binary(*names):
    return ParameterModel.from_domains([(n, ["on", "off"]) for n in names])


def test_load_two_switches():
    m = load_model("parameters:\n  - {name: A, values: [on, off]}\n  - {name: B, values: [on, off]}\n")
    assert m.k == 2
    assert m.sizes == [2, 2]
    # YAML 1.1 would turn these into booleans; tokens must stay verbatim
    assert m["A"].values == ("on", "off")


def test_load_overlap_fixture_document():
    m = load_model(bundled("overlap.yaml"))
    assert m.names == ["A", "B"]
    assert [p.index for p in m.parameters] == [0, 1]


def test_mapping_form_keeps_document_order():
    m = load_model("parameters:\n  z: [1, 2]\n  a: [x, y, w]\n")
    assert m.names == ["z", "a"]
    assert m["a"].values == ("x", "y", "w")


@pytest.mark.parametrize(
    "doc, message",
    [
        ("parameters:\n  - {name: A, values: [1]}\n", "domain too small"),
        ("parameters:\n  - {name: A, values: []}\n", "empty domain"),
        ("parameters:\n  - {name: A, values: [1, 2]}\n  - {name: A, values: [1, 2]}\n", "duplicate parameter"),
        ("parameters:\n  - {name: A, values: [1, 1]}\n", "duplicate value"),
        ("parameters:\n  - {name: A, values: [1, 2, 3, 4, 5, 6]}\n", "domain too large"),
        ("params: []\n", "malformed"),
        ("parameters: [\n", "malformed"),
    ],
)
def test_invalid_documents(doc, message):
    with pytest.raises(ModelError, match=message):
        load_model(doc)


def test_error_names_the_parameter():
    with pytest.raises(ModelError, match="'speed'"):
        load_model("parameters:\n  - {name: speed, values: [fast]}\n")


def test_domain_cap_is_overridable():
    doc = "parameters:\n  - {name: A, values: [1, 2, 3, 4, 5, 6]}\n"
    assert load_model(doc, max_values=None).sizes == [6]


def test_exhaustive_size():
    assert exhaustive_size(binary("a", "b", "c")) == 8
    m = ParameterModel.from_domains([(f"p{i}", ["0", "1", "2"]) for i in range(5)])
    assert exhaustive_size(m) == 243


def test_exhaustive_size_body_calculator():
    m = load_model(bundled("body_calculator.yaml"))
    assert m.sizes == [2, 4, 3, 3, 3, 4, 4]
    # oracle: count the rows of the explicit cross product
    assert exhaustive_size(m) == sum(1 for _ in itertools.product(*(p.values for p in m.parameters)))
    assert exhaustive_size(m) == 3456


def test_requirement_bounds():
    with pytest.raises(ModelError):
        CoverageRequirement([0, 1], 3)
    with pytest.raises(ModelError):
        CoverageRequirement([], 1)
    assert CoverageRequirement([2, 0], 2).relation == frozenset({0, 2})
    with pytest.raises(ModelError):
        uniform(binary("a", "b"), 3)


def test_suite_round_trips_and_dedupes():
    m = ParameterModel.from_domains([("x", ["a,b", "c"]), ("y", ["1", "2"])])
    s = TestSuite(m, label="demo")
    s.add(("a,b", "1"))
    s.add(("c", "2"))
    s.add(("a,b", "1"))
    fin = s.finalize()
    assert fin.cases == [("a,b", "1"), ("c", "2")]
    assert TestSuite.from_csv(m, fin.to_csv()).cases == fin.cases
    assert TestSuite.from_json(m, fin.to_json()).cases == fin.cases
    with pytest.raises(ModelError):
        s.add(("zz", "1"))


names = st.text("abcdefgh_", min_size=1, max_size=6)
tokens = st.text("abcxyz0123.-", min_size=1, max_size=5)


@given(st.dictionaries(names, st.lists(tokens, min_size=2, max_size=5, unique=True), min_size=1, max_size=6))
def test_serialize_round_trip(domains):
    m = ParameterModel.from_domains(domains)
    again = model_from_dict(read_document(m.to_json()))
    assert again == m
    assert json.loads(again.to_json()) == json.loads(m.to_json())
