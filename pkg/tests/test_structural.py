import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import brentq

from tradeiv.dgp import DGPParams, simulate_panel
from tradeiv.errors import DataError, DomainError, SingularityError
from tradeiv.structural import (
    StructuralParams,
    attenuation_report,
    beta_from_eta,
    epsilon_from_omega,
    estimate_supply,
    eta_from_beta,
    omega_from_epsilon,
)


def forward(eta, omega):
    return (1 + eta) / (1 - omega * (1 + eta))


def test_eta_from_beta_examples():
    assert eta_from_beta(-26.22, 0.0) == pytest.approx(-27.22, abs=1e-12)
    for w in (0.0, 0.089, 0.4):
        assert eta_from_beta(0.0, w) == -1.0


def test_eta_from_beta_with_sloped_supply():
    # root of the forward map, found by bracketing
    root = brentq(lambda e: forward(e, 0.089) - (-2.47), -50.0, -1.0, xtol=1e-14)
    got = eta_from_beta(-2.47, 0.089)
    assert got == pytest.approx(root, abs=1e-10)
    assert got == pytest.approx(-4.166, abs=5e-4)
    assert forward(got, 0.089) == pytest.approx(-2.47, abs=1e-12)


def test_beta_from_eta_examples():
    for w in (0.0, 0.3):
        assert beta_from_eta(-1.0, w) == 0.0
    assert beta_from_eta(-27.22, 0.0) == pytest.approx(-26.22, abs=1e-12)
    b = beta_from_eta(-3.47, 0.089)
    assert b == pytest.approx(-2.47 / (1 + 0.089 * 2.47), rel=1e-15)
    assert b == pytest.approx(-2.0249, abs=5e-5)
    assert eta_from_beta(b, 0.089) == pytest.approx(-3.47, abs=1e-12)


def test_singular_configurations():
    with pytest.raises(SingularityError):
        beta_from_eta(1.0, 0.5)  # 1 - 0.5 * 2 = 0
    with pytest.raises(SingularityError):
        eta_from_beta(-10.0, 0.2)  # 1 + 0.2 * -10 < 0
    with pytest.raises(DomainError):
        eta_from_beta(1.0, 1.0)
    with pytest.raises(DomainError):
        beta_from_eta(-2.0, -0.1)


def test_omega_zero_reduction_is_exact():
    for b in (-26.22, 3.06, -0.47, -2.47, 0.1, 12345.678):
        assert eta_from_beta(b, 0.0) == b - 1.0


@given(st.floats(-30, 5), st.floats(0, 0.4999))
def test_round_trip(eta, omega):
    assume(1 - omega * (1 + eta) > 1e-6)
    assert eta_from_beta(beta_from_eta(eta, omega), omega) == pytest.approx(eta, abs=1e-10)


@given(st.floats(-30, -1.001), st.floats(0, 0.49), st.floats(1e-4, 0.49))
def test_attenuation_monotone_in_omega(eta, w1, dw):
    w2 = min(w1 + dw, 0.4999)
    assume(w2 > w1)
    assert abs(beta_from_eta(eta, w2)) < abs(beta_from_eta(eta, w1))


def test_epsilon_from_omega():
    assert epsilon_from_omega(0.089) == pytest.approx(10.236, abs=1e-3)
    assert epsilon_from_omega(1.0) == 0.0
    assert epsilon_from_omega(0.5) == 1.0
    assert epsilon_from_omega(0.0) == math.inf
    for bad in (-0.1, 1.5):
        with pytest.raises(DomainError):
            epsilon_from_omega(bad)


@given(st.floats(1e-6, 1.0))
def test_omega_epsilon_round_trip(omega):
    assert omega_from_epsilon(epsilon_from_omega(omega)) == pytest.approx(omega, abs=1e-12)


def test_structural_params_consistency():
    p = StructuralParams(eta=-3.47, omega=0.089)
    assert p.omega * (1 + p.epsilon) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        StructuralParams(eta=-3.0, omega=0.1, epsilon=5.0)
    with pytest.raises(DomainError):
        StructuralParams(eta=-3.0, tau={"MY": 0.9})


def test_attenuation_report_examples():
    r = attenuation_report(-3.47, 0.089)
    assert r.applicable and r.bound_holds
    assert r.abs_beta == pytest.approx(2.0249, abs=5e-5)
    assert r.abs_one_plus_eta == pytest.approx(2.47)
    edge = attenuation_report(-1.0, 0.5)
    assert not edge.applicable and not edge.bound_holds


def test_attenuation_grid():
    etas = np.arange(-30.0, -1.01 + 1e-9, 0.01)
    omegas = np.linspace(0.005, 0.5, 100)
    for w in omegas:
        for e in etas:
            assert attenuation_report(float(e), float(w)).bound_holds


def test_estimate_supply_recovers_slope():
    params = DGPParams(omega=0.1, n_months=60, lme_passthrough=1.0, seed=5)
    s = estimate_supply(simulate_panel(params).panel)
    assert abs(s.omega - 0.1) < 4 * s.omega_se
    assert abs(s.gamma - 1.0) < 4 * s.gamma_se
    assert s.n == params.n_partners * (params.n_months - 1)
    assert 0.0 <= s.underid_lm_p < 1e-6 and s.weak_id_f > 16.38
    assert 0.0 < s.r2_centered <= 1.0
    assert s.epsilon == pytest.approx(1 / s.omega - 1)


def test_estimate_supply_needs_unit_values():
    panel = simulate_panel(DGPParams(n_months=12)).panel
    panel["ln_uv"] = np.nan
    with pytest.raises(DataError):
        estimate_supply(panel)
