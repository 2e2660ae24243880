import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cacit import bundled
from cacit.correlate import (
    CorrelationError,
    CorrelationMatrix,
    StrengthPlan,
    build_plan,
    correlation_matrix,
    partner,
)

TABLES = [
    "replicated_workers_correlation.csv",
    "body_calculator_correlation.csv",
    "searching_correlation.csv",
    "mortgage_correlation.csv",
]


def table(name):
    return CorrelationMatrix.from_csv(bundled(name).read_text())


@pytest.fixture
def workers():
    return table("replicated_workers_correlation.csv")


def test_identity_ratio():
    m = correlation_matrix([0.12, 0.12], {(0, 1): 0.0144}, ["X", "Y"])
    assert m.raw[0, 1] == 1.0
    assert m[0, 1] == m[1, 0] == 1.0
    assert np.isnan(m.values[0, 0])


def test_zero_impact_zeroes_row_and_column():
    singles = [Fraction(1, 2), Fraction(0), Fraction(1, 4)]
    pairs = {(0, 1): Fraction(1, 2), (0, 2): Fraction(3, 4), (1, 2): Fraction(1, 4)}
    m = correlation_matrix(singles, pairs)
    assert m.off_diagonal(1).tolist() == [0.0, 0.0]
    assert m[0, 2] == 1.0


def test_raw_ratios_are_normalized_by_the_largest():
    # raw: (0,1) -> 0.8/(0.6*0.6), (0,2) -> 0.5/(0.6*0.5), (1,2) -> 0.5/(0.6*0.5)
    singles = [0.6, 0.6, 0.5]
    pairs = {(0, 1): 0.8, (0, 2): 0.5, (1, 2): 0.5}
    m = correlation_matrix(singles, pairs)
    top = 0.8 / 0.36
    assert m.scale == pytest.approx(top)
    assert m[0, 2] == pytest.approx((0.5 / 0.3) / top)
    assert m[0, 1] == 1.0


def test_all_zero_impacts():
    m = correlation_matrix([0, 0, 0], {(0, 1): 0, (0, 2): 0, (1, 2): 0})
    assert np.nan_to_num(m.values).sum() == 0


def test_missing_pair_impact():
    with pytest.raises(CorrelationError, match="missing pair"):
        correlation_matrix([0.1, 0.2, 0.3], {(0, 1): 0.1, (0, 2): 0.1})


def test_imported_table_is_symmetric(workers):
    i, j = workers.index_of("num_workers"), workers.index_of("num_items")
    assert workers[i, j] == workers[j, i] == 0.947


def test_import_rejects_asymmetry():
    with pytest.raises(CorrelationError, match="not symmetric"):
        CorrelationMatrix.from_csv("parameter,a,b\na,-,0.5\nb,0.4,-\n")
    with pytest.raises(CorrelationError):
        CorrelationMatrix.from_csv("parameter,a,b\na,-,1.5\nb,1.5,-\n")


def test_csv_round_trip(workers):
    text = workers.to_csv()
    assert text.splitlines()[1].startswith("num_workers,-,0.947000")
    again = CorrelationMatrix.from_csv(text)
    assert np.array_equal(again.values, workers.values, equal_nan=True)


def test_partner_tie_goes_to_lower_index(workers):
    p = partner(workers, workers.index_of("min"))
    assert workers.names[p.index] == "num_items"
    assert p.value == 1.0 and not p.degenerate


def test_partner_of_epsilon(workers):
    p = partner(workers, workers.index_of("epsilon"))
    assert workers.names[p.index] == "num_workers"
    assert p.value == 0.739


def test_two_parameters_partner_each_other():
    m = correlation_matrix([0.3, 0.2], {(0, 1): 0.4})
    assert partner(m, 0).index == 1 and partner(m, 1).index == 0


def test_zero_row_partner_is_flagged():
    m = correlation_matrix([0.5, 0, 0.5], {(0, 1): 0.5, (0, 2): 0.6, (1, 2): 0.5})
    assert partner(m, 1) == (0, 0.0, True)


@pytest.mark.parametrize("name", TABLES)
def test_partner_entry_appears_twice(name):
    m = table(name)
    for i in range(m.k):
        j = partner(m, i).index
        assert m[i, j] == m[j, i]


def test_workers_plan(workers):
    plan = build_plan(workers, 0.9, 0.1, 2, 3)
    groups = [({workers.names[i] for i in g}, s) for g, s in plan.groups]
    assert groups == [({"num_workers", "num_items", "min", "max"}, 3)]
    assert [workers.names[i] for i in plan.base_only] == ["epsilon"]
    assert plan.dont_care == frozenset()


def test_workers_plan_full_strength(workers):
    plan = build_plan(workers, full_strength=True)
    assert [s for _, s in plan.groups] == [4]


def test_searching_has_no_groups():
    m = table("searching_correlation.csv")
    assert np.nanmax(m.values) == 0.71
    plan = build_plan(m, 0.9, 0.1)
    assert plan.groups == () and plan.dont_care == frozenset()
    assert plan.base_only == frozenset(range(m.k))


def test_all_zero_plan_is_strength_one_only():
    m = correlation_matrix([0, 0, 0], {(0, 1): 0, (0, 2): 0, (1, 2): 0})
    plan = build_plan(m)
    assert plan.dont_care == {0, 1, 2}
    assert [(sorted(r.relation), r.strength) for r in plan.requirements()] == [([0], 1), ([1], 1), ([2], 1)]


@pytest.mark.parametrize(
    "kwargs",
    [
        {"theta_high": 0.1, "theta_low": 0.1},
        {"theta_high": 0.5, "theta_low": 0.7},
        {"theta_high": 1.2, "theta_low": 0.1},
        {"t_base": 1},
        {"t_base": 3, "t_high": 3},
    ],
)
def test_plan_validation(workers, kwargs):
    with pytest.raises(CorrelationError):
        build_plan(workers, **kwargs)


def test_plan_json_round_trip(workers):
    plan = build_plan(workers)
    doc = plan.to_dict()
    assert doc["thresholds"] == {"high": 0.9, "low": 0.1}
    assert doc["requirements"][0] == {"relation": ["num_workers", "num_items", "min", "max", "epsilon"], "strength": 2}
    assert StrengthPlan.from_dict(doc) == plan


# properties --------------------------------------------------------------------

@st.composite
def impact_sets(draw):
    k = draw(st.integers(2, 6))
    frac = st.fractions(min_value=0, max_value=1, max_denominator=50)
    singles = [draw(frac) for _ in range(k)]
    pairs = {pq: draw(frac) for pq in itertools.combinations(range(k), 2)}
    return singles, pairs


@given(impact_sets())
def test_matrix_invariants(data):
    singles, pairs = data
    m = correlation_matrix(singles, pairs)
    off = ~np.eye(m.k, dtype=bool)
    assert np.array_equal(m.values, m.values.T, equal_nan=True)
    assert ((m.values[off] >= 0) & (m.values[off] <= 1)).all()
    if (m.raw[off] > 0).any():
        assert (m.values[off] == 1.0).any()
    raw_view = CorrelationMatrix(m.names, m.raw, m.raw, None)
    for i in range(m.k):
        assert partner(m, i).index == partner(raw_view, i).index


@settings(max_examples=60)
@given(impact_sets(), st.floats(0.05, 0.45), st.floats(0.5, 0.95), st.floats(0.0, 0.05))
def test_threshold_monotonicity(data, low, high, bump):
    m = correlation_matrix(*data)
    plan = build_plan(m, high, low)
    stricter = build_plan(m, min(1.0, high + bump), low)
    for g, _ in stricter.groups:
        assert any(g <= h for h, _ in plan.groups)
    looser_low = build_plan(m, high, max(0.0, low - bump))
    assert looser_low.dont_care <= plan.dont_care
    covered = set().union(*(r.relation for r in plan.requirements()))
    assert covered == set(range(m.k))
    members = [i for g, _ in plan.groups for i in g]
    assert len(members) == len(set(members))
    assert not set(members) & plan.dont_care
    assert set(members) | plan.base_only | plan.dont_care == set(range(m.k))
