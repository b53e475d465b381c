import itertools
import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tradeiv.errors import DegenerateSeriesError, DomainError, SelectionError
from tradeiv.instruments import (
    assignments_frame,
    correlation,
    lagged_instrument,
    log_changes,
    rank_candidates,
    select_instruments,
)


def test_log_changes():
    assert log_changes([100, 110]) == pytest.approx([math.log(1.1)])
    assert log_changes([100, 110])[0] == pytest.approx(0.09531, abs=1e-5)
    np.testing.assert_array_equal(log_changes([7.0] * 5), np.zeros(4))
    assert log_changes([100, 50]) == pytest.approx([-math.log(2)])
    with pytest.raises(DomainError):
        log_changes([1.0, 0.0, 2.0])
    with pytest.raises(DomainError):
        log_changes([1.0])


def test_log_changes_series_keeps_later_index():
    s = pd.Series([1.0, 2.0, 4.0], index=pd.period_range("2015-01", periods=3, freq="M"))
    out = log_changes(s)
    assert list(out.index.astype(str)) == ["2015-02", "2015-03"]


def test_correlation_examples():
    a = np.array([0.1, -0.3, 0.25, 0.05, -0.12])
    assert correlation(a, a) == pytest.approx(1.0)
    assert correlation(a, -a) == pytest.approx(-1.0)
    # textbook Pearson by hand: sums of products of deviations
    x, y = [1.0, 2.0, 3.0, 5.0], [2.0, 1.0, 4.0, 3.0]
    sxy, sxx, syy = 3.5, 8.75, 5.0
    assert correlation(x, y) == pytest.approx(sxy / math.sqrt(sxx * syy), rel=1e-14)


def test_correlation_aligns_series_on_overlap():
    idx = pd.period_range("2015-01", periods=6, freq="M")
    a = pd.Series([1.0, 2.0, 3.0, 5.0, np.nan, 9.0], index=idx)
    b = pd.Series([2.0, 1.0, 4.0, 3.0, 8.0], index=idx[:5])
    assert correlation(a, b) == pytest.approx(3.5 / math.sqrt(8.75 * 5.0), rel=1e-14)


def test_correlation_degenerate():
    with pytest.raises(DegenerateSeriesError):
        correlation([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateSeriesError):
        correlation([1.0, 2.0], [1.0, 2.0])


REGIONS = {"MYR": "Asia", "SGD": "Asia", "EUR": "Europe", "BRL": "SouthAmerica"}
CORRS = {"SGD": 0.95, "EUR": 0.90, "BRL": 0.60}


def test_select_excludes_home_region():
    a = select_instruments("MYR", CORRS, REGIONS, k=1)
    assert a.currencies == ["EUR"]
    a2 = select_instruments("MYR", CORRS, REGIONS, k=2)
    assert a2.currencies == ["EUR", "BRL"]
    assert a2.instruments[0] == ("EUR", 0.90, "Europe")


def test_select_insufficient():
    with pytest.raises(SelectionError):
        select_instruments("MYR", {"SGD": 0.9}, REGIONS, k=1)
    with pytest.raises(SelectionError):
        select_instruments("MYR", CORRS, REGIONS, k=3)


def test_select_uses_absolute_correlation_and_lexical_ties():
    regions = {"T": "A", "X": "B", "Y": "C", "W": "B"}
    a = select_instruments("T", {"X": 0.5, "Y": -0.8, "W": -0.5}, regions, k=3)
    assert a.currencies == ["Y", "W", "X"]


@st.composite
def selection_problem(draw):
    n = draw(st.integers(1, 8))
    names = [f"C{i}" for i in range(n)]
    regions = {c: draw(st.sampled_from(["A", "B", "C"])) for c in names}
    regions["T"] = draw(st.sampled_from(["A", "B", "C"]))
    corrs = {c: draw(st.sampled_from([-0.9, -0.5, 0.0, 0.3, 0.5, 0.9, 1.0])) for c in names}
    k = draw(st.integers(1, 3))
    return regions, corrs, k


@given(selection_problem())
def test_selection_matches_brute_force(problem):
    regions, corrs, k = problem
    eligible = [c for c in corrs if regions[c] != regions["T"]]
    if len(eligible) < k:
        with pytest.raises(SelectionError):
            select_instruments("T", corrs, regions, k)
        return
    a = select_instruments("T", corrs, regions, k)
    assert all(reg != regions["T"] for _, _, reg in a.instruments)
    mags = [abs(r) for _, r, _ in a.instruments]
    assert mags == sorted(mags, reverse=True)
    # brute force over all k-subsets: the choice maximises total |corr|
    best = max(sum(abs(corrs[c]) for c in combo) for combo in itertools.combinations(eligible, k))
    assert sum(mags) == pytest.approx(best)
    chosen = set(a.currencies)
    for c in set(eligible) - chosen:
        for d in chosen:
            assert abs(corrs[c]) < abs(corrs[d]) or (abs(corrs[c]) == abs(corrs[d]) and c > d)
    assert a == select_instruments("T", dict(reversed(list(corrs.items()))), regions, k)


def test_rank_candidates_picks_correlated_foreign_currency(rng):
    idx = pd.period_range("2011-01", periods=60, freq="M")
    common = np.cumsum(rng.normal(0, 0.03, 60))
    levels = pd.DataFrame(
        {
            "MYR": np.exp(common + rng.normal(0, 0.002, 60)),
            "SGD": np.exp(common + rng.normal(0, 0.001, 60)),
            "EUR": np.exp(common + rng.normal(0, 0.01, 60)),
            "BRL": np.exp(np.cumsum(rng.normal(0, 0.03, 60))),
        },
        index=idx,
    )
    a = rank_candidates("MYR", levels, REGIONS, k=2)
    assert a.currencies == ["EUR", "BRL"]
    assert a.instruments[0][1] > 0.8
    frame = assignments_frame([a])
    assert list(frame.columns) == ["target", "rank", "instrument", "correlation", "region"]
    assert list(frame["rank"]) == [1, 2]


def _series(partner, months, values):
    return pd.DataFrame(
        {"partner": partner, "month": [pd.Period(m, "M") for m in months], "ln_e": values}
    )


def test_lagged_instrument_shift():
    panel = _series("A", ["2015-01", "2015-02", "2015-03"], [1.0, 2.0, 3.0])
    out = lagged_instrument(panel)
    assert list(out["month"].astype(str)) == ["2015-02", "2015-03"]
    assert list(out["L_ln_e"]) == [1.0, 2.0]


def test_lagged_instrument_single_month_and_gap():
    assert lagged_instrument(_series("A", ["2015-01"], [1.0])).empty
    gap = _series("A", ["2015-01", "2015-02", "2015-04", "2015-05"], [1.0, 2.0, 4.0, 5.0])
    out = lagged_instrument(gap)
    assert list(out["month"].astype(str)) == ["2015-02", "2015-05"]
    assert list(out["L_ln_e"]) == [1.0, 4.0]
    with pytest.raises(DomainError):
        lagged_instrument(gap, on_gap="error")


def test_lagged_instrument_does_not_cross_partners():
    panel = pd.concat(
        [_series("A", ["2015-01", "2015-02"], [1.0, 2.0]), _series("B", ["2015-03", "2015-04"], [3.0, 4.0])]
    )
    out = lagged_instrument(panel)
    assert list(zip(out["partner"], out["L_ln_e"])) == [("A", 1.0), ("B", 3.0)]
