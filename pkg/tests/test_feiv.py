import math

import numpy as np
import pandas as pd
import pytest

from conftest import frame_from_arrays
from tradeiv.dgp import DGPParams, simulate_panel
from tradeiv.errors import CoverageError
from tradeiv.estimation import Design, hac_vcov, ols, within_transform
from tradeiv.feiv import FEIVSpec, fe_iv, fe_ols


def test_fe_iv_without_instruments_is_fe_ols(toy_panel):
    y, X, Z, g, t = toy_panel
    panel = frame_from_arrays(y, X, Z, g, t)
    d = within_transform(Design(y, X, X, g, t))
    ref = ols(d.y, d.X)
    V = hac_vcov(d.X, d.X, ref.residuals, d.groups, d.times, 2)
    r = fe_ols(panel)
    np.testing.assert_allclose([r.coef["ln_e"], r.coef["ln_p_lme"]], ref.beta_hat, atol=1e-12)
    np.testing.assert_allclose(r.vcov, V, rtol=1e-12)
    assert math.isnan(r.diagnostics.weak_id_f)


def test_endogenous_as_own_instrument_is_fe_ols(toy_panel):
    panel = frame_from_arrays(*toy_panel)
    iv = fe_iv(panel, FEIVSpec(instruments=("ln_e",)))
    ref = fe_ols(panel)
    np.testing.assert_allclose(iv.estimates.beta_hat, ref.estimates.beta_hat, atol=1e-10)


def test_fe_iv_recovers_dgp_beta():
    p = DGPParams(kappa=0.5, n_months=80, seed=21)
    r = fe_iv(simulate_panel(p).panel, FEIVSpec())
    assert abs(r.beta - p.beta) < 3 * r.beta_se
    assert r.n == p.n_partners * p.n_months and r.n_groups == p.n_partners
    assert r.eta == pytest.approx(r.beta - 1.0)
    assert r.eta_sensitivity[0.0] == r.eta
    assert r.diagnostics.overid_df == 1
    assert 0.0 <= r.diagnostics.overid_p <= 1.0
    assert r.diagnostics.weak_id_f > r.diagnostics.stock_yogo_ref


def test_fe_iv_single_group_regime():
    panel = simulate_panel(DGPParams(n_partners=1, n_months=25)).panel
    r = fe_iv(panel, FEIVSpec(), regime="Period 3")
    assert r.n_groups == 1 and r.n == 25
    assert np.isfinite(r.beta_se)


def test_fe_iv_reports_singletons():
    panel = simulate_panel(DGPParams(n_months=12)).panel
    extra = panel.iloc[[0]].assign(partner="P99")
    r = fe_iv(pd.concat([panel, extra]), FEIVSpec())
    assert r.dropped_singletons == 1 and r.n == len(panel)


def test_fe_iv_missing_instrument_values():
    panel = simulate_panel(DGPParams(n_months=12)).panel
    panel.loc[panel["partner"] == "P02", "z1"] = np.nan
    with pytest.raises(CoverageError, match="P02"):
        fe_iv(panel, FEIVSpec())


def test_fe_iv_empty_panel():
    panel = simulate_panel(DGPParams(n_months=12)).panel.iloc[:0]
    with pytest.raises(CoverageError):
        fe_iv(panel, FEIVSpec())


def test_fe_iv_row_order_irrelevant():
    panel = simulate_panel(DGPParams(n_months=20)).panel
    a = fe_iv(panel, FEIVSpec())
    b = fe_iv(panel.sample(frac=1.0, random_state=1), FEIVSpec())
    assert a.coef == b.coef
    np.testing.assert_array_equal(a.vcov, b.vcov)
