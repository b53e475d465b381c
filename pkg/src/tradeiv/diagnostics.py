"""Instrument diagnostics and hypothesis tests.

All statistics take the within-transformed arrays that the estimator used,
so fixed effects are already absorbed. Only a single endogenous regressor is
supported by the weak- and under-identification statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, IdentificationError
from .estimation import _as_matrix, hac_vcov, long_run_variance, ols, tsls

# Stock-Yogo 10% critical value for one endogenous regressor, as quoted for
# the main and supply-side regressions.
STOCK_YOGO_10 = 16.38


def chi2_sf(x, df):
    """Upper tail of the chi-square distribution."""
    if not df >= 1 or not math.isfinite(df):
        raise DomainError(f"invalid degrees of freedom {df}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"statistic must be nonnegative, got {x}")
    return float(special.gammaincc(df / 2.0, x / 2.0))


def f_sf(x, df1, df2):
    """Upper tail of the F distribution; ``df2=inf`` gives the chi-square limit."""
    if not df1 >= 1 or not math.isfinite(df1) or not df2 >= 1:
        raise DomainError(f"invalid degrees of freedom ({df1}, {df2})")
    if x < 0 or math.isnan(x):
        raise DomainError(f"statistic must be nonnegative, got {x}")
    if math.isinf(df2):
        return chi2_sf(df1 * x, df1)
    return float(special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * x)))


def normal_two_sided_p(estimate, se):
    if not se > 0:
        return math.nan
    return chi2_sf((estimate / se) ** 2, 1)


def wald(beta, vcov, R=None, r=None):
    """Wald statistic for ``R beta = r``; returns ``(statistic, df)``."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    vcov = np.atleast_2d(np.asarray(vcov, dtype=float))
    R = np.eye(beta.size) if R is None else np.atleast_2d(np.asarray(R, dtype=float))
    r = np.zeros(R.shape[0]) if r is None else np.atleast_1d(np.asarray(r, dtype=float))
    d = R @ beta - r
    stat = float(d @ np.linalg.solve(R @ vcov @ R.T, d))
    return stat, R.shape[0]


def wald_eta_zero(beta_hat, var_beta):
    """Test that the demand elasticity is zero when supply is flat.

    With a perfectly elastic supply the elasticity is ``beta - 1``, so the
    null is ``beta = 1``. Returns ``(statistic, p)`` with a chi-square(1)
    reference.
    """
    if not var_beta > 0:
        raise DomainError("variance must be positive")
    stat = (beta_hat - 1.0) ** 2 / var_beta
    return stat, chi2_sf(stat, 1)


@dataclass
class FirstStage:
    coef: np.ndarray
    vcov: np.ndarray
    f_stat: float
    n_excluded: int


def first_stage(x_endog, Z_excluded, Z_exog, groups, times, bandwidth):
    """Robust first-stage regression of the endogenous regressor.

    The F statistic is the HAC Wald statistic on the excluded-instrument
    coefficients divided by their number. With one endogenous regressor it
    coincides with the Kleibergen-Paap rk Wald F.
    """
    Ze = _as_matrix(Z_excluded)
    m = Ze.shape[1]
    if m == 0:
        raise IdentificationError("no excluded instruments")
    Zx = _as_matrix(Z_exog) if Z_exog is not None else np.empty((Ze.shape[0], 0))
    W = np.hstack([Ze, Zx])
    fit = ols(x_endog, W)
    V = hac_vcov(W, W, fit.residuals, groups, times, bandwidth)
    c = fit.beta_hat[:m]
    stat, _ = wald(c, V[:m, :m])
    return FirstStage(c, V[:m, :m], stat / m, m)


def weak_id_f(x_endog, Z_excluded, Z_exog, groups, times, bandwidth=2):
    return first_stage(x_endog, Z_excluded, Z_exog, groups, times, bandwidth).f_stat


def _partial_out(a, C):
    if C is None or C.shape[1] == 0:
        return a
    coef, *_ = np.linalg.lstsq(C, a, rcond=None)
    return a - C @ coef


def underid_lm(x_endog, Z_excluded, Z_exog=None):
    """Rank-zero LM test: ``n R^2`` of the first stage on excluded instruments.

    The endogenous regressor and the excluded instruments are first purged
    of the exogenous regressors and centred. Returns ``(LM, df, p)``.
    """
    Ze = _as_matrix(Z_excluded)
    m = Ze.shape[1]
    if m == 0:
        raise IdentificationError("no excluded instruments")
    x = np.asarray(x_endog, dtype=float).reshape(-1)
    C = _as_matrix(Z_exog) if Z_exog is not None else None
    xt = _partial_out(x, C)
    Zt = _partial_out(Ze, C)
    xt = xt - xt.mean()
    Zt = Zt - Zt.mean(axis=0)
    tss = xt @ xt
    if not tss > 0:
        raise IdentificationError("endogenous regressor has no variation")
    coef, *_ = np.linalg.lstsq(Zt, xt, rcond=None)
    fitted = Zt @ coef
    n = x.shape[0]
    lm = n * float(fitted @ fitted) / float(tss)
    lm = min(lm, float(n))
    return lm, m, chi2_sf(lm, m)


@dataclass
class OveridResult:
    j: float
    df: int
    p: float
    just_identified: bool


def overid_j(y, X, Z, groups, times, bandwidth=2, residuals=None):
    """Hansen J test of the overidentifying restrictions.

    The long-run variance of the moments ``z_t u_t`` is estimated with the
    Bartlett kernel at the 2SLS residuals; J is then evaluated at the
    two-step efficient GMM estimate using that weight. In the just-identified
    case the moments are zero at the 2SLS estimate, ``df = 0`` and ``p`` is
    NaN.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    X, Z = _as_matrix(X), _as_matrix(Z)
    if residuals is None:
        residuals = tsls(y, X, Z).residuals
    df = Z.shape[1] - X.shape[1]
    if df < 0:
        raise IdentificationError("fewer instruments than regressors")
    S = long_run_variance(Z * np.asarray(residuals)[:, None], groups, times, bandwidth)
    if df == 0:
        g = Z.T @ residuals
        j = float(g @ np.linalg.lstsq(S, g, rcond=None)[0]) if np.any(g) else 0.0
        return OveridResult(j, 0, math.nan, True)
    W = np.linalg.pinv(S)
    ZX, Zy = Z.T @ X, Z.T @ y
    beta = np.linalg.solve(ZX.T @ W @ ZX, ZX.T @ W @ Zy)
    g = Z.T @ (y - X @ beta)
    j = max(float(g @ W @ g), 0.0)
    return OveridResult(j, df, chi2_sf(j, df), False)


@dataclass
class DiagnosticsBundle:
    weak_id_f: float
    overid_j: float
    overid_df: int
    overid_p: float
    underid_lm: float
    underid_lm_p: float
    wald_eta_zero: float
    wald_eta_zero_p: float
    stock_yogo_ref: float = STOCK_YOGO_10
