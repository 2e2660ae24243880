import pytest
from hypothesis import given, settings, strategies as st

from cacit import bundled
from cacit.evaluate import (
    EvaluationError,
    compare,
    efficiency,
    load_fixture,
    mutation_score,
    render_text,
    run_suite,
    synthetic_report,
)
from cacit.model import ModelError, TestSuite


def suite_of(model, *cases, label="s"):
    s = TestSuite(model, label=label)
    for c in cases:
        s.add(c)
    return s


def test_run_suite_overlap(overlap):
    log = run_suite(suite_of(overlap.model, ("on", "on"), ("off", "off")), overlap.sut)
    assert log == [{2, 3, 4, 5}, frozenset()]
    assert run_suite(TestSuite(overlap.model), overlap.sut) == []


def test_run_suite_rejects_other_models(overlap, interaction):
    with pytest.raises(EvaluationError):
        run_suite(TestSuite(interaction.model), overlap.sut)


def test_fixture_guard_with_unknown_parameter():
    doc = "parameters:\n  - {name: a, values: [0, 1]}\nsut:\n  total_units: 2\n  blocks:\n    - {lines: [1], guard: b = 1}\n"
    with pytest.raises(ModelError, match="unknown parameter 'b'"):
        load_fixture(doc)


def test_fixture_lines_must_fit():
    doc = "parameters:\n  - {name: a, values: [0, 1]}\nsut:\n  total_units: 2\n  blocks:\n    - {lines: [3], guard: a = 1}\n"
    with pytest.raises(ModelError, match="outside"):
        load_fixture(doc)


def test_kill_guards_see_coverage(overlap):
    rep = mutation_score(suite_of(overlap.model, ("on", "off")), overlap.faults, overlap.sut)
    assert rep.killed_ids == ("m2",)


def test_empty_suite_kills_nothing(overlap):
    rep = mutation_score(TestSuite(overlap.model), overlap.faults, overlap.sut)
    assert rep.killed == 0 and rep.score == 0
    with pytest.raises(EvaluationError):
        efficiency(rep)


@pytest.mark.parametrize(
    "killed, size, score, eff",
    [(415, 19, 0.27, 21.84), (516, 62, 0.34, 8.32)],
)
def test_efficiency_arithmetic(killed, size, score, eff):
    rep = synthetic_report("x", killed, 1512, size)
    assert round(float(rep.score), 2) == score
    assert round(efficiency(rep), 2) == eff


def test_zero_kills_zero_efficiency():
    assert efficiency(synthetic_report("x", 0, 10, 4)) == 0


def test_relative_efficiency_change():
    cmp = compare(synthetic_report("2-way", 415, 1512, 19), synthetic_report("mixed", 516, 1512, 62))
    assert cmp.relative_efficiency_change == pytest.approx(-0.619, abs=1e-3)
    assert cmp.delta_killed == 101
    assert "-61.9%" in render_text(cmp)
    assert "415/1512 = 27%" in render_text(cmp)
    assert "516/62 = 8.32" in render_text(cmp)


def test_identical_reports():
    a = synthetic_report("a", 3, 10, 5)
    cmp = compare(a, a)
    assert (cmp.delta_killed, cmp.newly_killed, cmp.relative_efficiency_change) == (0, (), 0)


def test_newly_killed(overlap):
    base = mutation_score(suite_of(overlap.model, ("off", "on")), overlap.faults, overlap.sut)
    cand = mutation_score(suite_of(overlap.model, ("on", "on")), overlap.faults, overlap.sut)
    cmp = compare(base, cand)
    assert base.killed_ids == ()
    assert cmp.newly_killed == ("m1",)


def test_compare_needs_same_fault_model():
    with pytest.raises(EvaluationError):
        compare(synthetic_report("a", 1, 10, 2), synthetic_report("b", 1, 11, 2))


def test_alive_mutants_are_reported_not_fatal(interaction):
    from itertools import product
    everything = suite_of(interaction.model, *product("012", repeat=5))
    rep = mutation_score(everything, interaction.faults, interaction.sut)
    assert rep.killed_ids[-1] != "m09"
    assert rep.alive_by_type() == {"JSI": 1}


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_kill_monotonicity(data):
    from itertools import product
    interaction = load_fixture(bundled("interaction.yaml"))
    universe = list(product("012", repeat=5))
    small = data.draw(st.lists(st.sampled_from(universe), max_size=10))
    extra = data.draw(st.lists(st.sampled_from(universe), max_size=10))
    a = mutation_score(suite_of(interaction.model, *small), interaction.faults, interaction.sut)
    b = mutation_score(suite_of(interaction.model, *(small + extra)), interaction.faults, interaction.sut)
    assert set(a.killed_ids) <= set(b.killed_ids)
    assert 0 <= a.score <= 1
    again = mutation_score(suite_of(interaction.model, *small), interaction.faults, interaction.sut)
    assert again == a
