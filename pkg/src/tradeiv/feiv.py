"""Fixed-effects IV estimation of the export-value equation for one regime."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import (
    DiagnosticsBundle,
    first_stage,
    normal_two_sided_p,
    overid_j,
    underid_lm,
    wald_eta_zero,
)
from .errors import CoverageError, DomainError
from .estimation import CoefficientEstimates, Design, hac_vcov, ols, tsls, within_transform
from .structural import eta_from_beta


@dataclass(frozen=True)
class FEIVSpec:
    """Which panel columns play which role.

    An empty ``instruments`` tuple makes the instrument set equal to the
    regressors, i.e. fixed-effects OLS.
    """

    dependent: str = "ln_x"
    endogenous: str = "ln_e"
    exogenous: tuple = ("ln_p_lme",)
    instruments: tuple = ("z1", "z2")
    bandwidth: int = 2
    group: str = "partner"
    time: str = "month"

    def __post_init__(self):
        if self.bandwidth < 0:
            raise DomainError("bandwidth must be nonnegative")
        object.__setattr__(self, "exogenous", tuple(self.exogenous))
        object.__setattr__(self, "instruments", tuple(self.instruments))


@dataclass
class EstimationResult:
    """Per-regime output: coefficients, HAC covariance and diagnostics."""

    regime: str | None
    names: tuple
    coef: dict
    se: dict
    vcov: np.ndarray
    n: int
    n_groups: int
    dropped_singletons: int
    endogenous: str
    diagnostics: DiagnosticsBundle
    eta_sensitivity: dict = field(default_factory=dict)
    estimates: CoefficientEstimates | None = None
    method: str = "fe-iv"

    @property
    def beta(self):
        return self.coef[self.endogenous]

    @property
    def beta_se(self):
        return self.se[self.endogenous]

    @property
    def eta(self):
        return eta_from_beta(self.beta, 0.0)

    def p_value(self, name):
        return normal_two_sided_p(self.coef[name], self.se[name])


def build_design(panel, spec: FEIVSpec) -> Design:
    panel = panel.sort_values([spec.group, spec.time], kind="mergesort")
    cols = [spec.dependent, spec.endogenous, *spec.exogenous, *spec.instruments]
    missing = [c for c in cols if c not in panel.columns]
    if missing:
        raise CoverageError(f"panel lacks columns {missing}", gaps=missing)
    values = panel[cols].to_numpy(dtype=float)
    if not np.isfinite(values).all():
        bad = sorted(panel.loc[~np.isfinite(values).all(axis=1), spec.group].unique())
        raise CoverageError(f"missing values (e.g. unassigned instruments) for partners {bad}", gaps=bad)
    x_names = (spec.endogenous, *spec.exogenous)
    z_names = (*spec.instruments, *spec.exogenous) if spec.instruments else x_names
    return Design(
        y=panel[spec.dependent].to_numpy(float),
        X=panel[list(x_names)].to_numpy(float),
        Z=panel[list(z_names)].to_numpy(float),
        groups=panel[spec.group].to_numpy(),
        times=panel[spec.time].to_numpy(),
        x_names=x_names,
        z_names=z_names,
    )


def fe_iv(panel, spec: FEIVSpec = FEIVSpec(), regime=None, omegas=(0.0, 0.089)) -> EstimationResult:
    """Within transform, 2SLS and Bartlett HAC covariance, plus diagnostics.

    ``omegas`` lists supply slopes at which the implied demand elasticity is
    reported in ``eta_sensitivity``; values outside the invertible region
    are reported as NaN.
    """
    if panel.empty:
        raise CoverageError(f"regime {regime!r} has no observations")
    design = within_transform(build_design(panel, spec))
    L = spec.bandwidth
    m = len(spec.instruments)
    groups, times = design.groups, design.times

    if m:
        est = tsls(design.y, design.X, design.Z, design.x_names, design.z_names)
    else:
        est = ols(design.y, design.X, design.x_names)
    est.vcov = hac_vcov(design.X, design.Z, est.residuals, groups, times, L)
    est.g = design.n_groups
    est.method = "fe-iv" if m else "fe-ols"

    beta, var_beta = float(est.beta_hat[0]), float(est.vcov[0, 0])
    wald_stat, wald_p = wald_eta_zero(beta, var_beta) if var_beta > 0 else (math.nan, math.nan)
    if m:
        fs = first_stage(design.X[:, 0], design.Z[:, :m], design.Z[:, m:], groups, times, L)
        lm, _, lm_p = underid_lm(design.X[:, 0], design.Z[:, :m], design.Z[:, m:])
        oj = overid_j(design.y, design.X, design.Z, groups, times, L, residuals=est.residuals)
        diag = DiagnosticsBundle(fs.f_stat, oj.j, oj.df, oj.p, lm, lm_p, wald_stat, wald_p)
    else:
        nan = math.nan
        diag = DiagnosticsBundle(nan, nan, 0, nan, nan, nan, wald_stat, wald_p)

    sens = {}
    for w in omegas:
        try:
            sens[float(w)] = eta_from_beta(beta, w)
        except DomainError:
            sens[float(w)] = math.nan

    se = est.se
    return EstimationResult(
        regime=regime,
        names=design.x_names,
        coef={k: float(v) for k, v in zip(design.x_names, est.beta_hat)},
        se={k: float(v) for k, v in zip(design.x_names, se)},
        vcov=est.vcov,
        n=design.n,
        n_groups=design.n_groups,
        dropped_singletons=design.dropped_singletons,
        endogenous=spec.endogenous,
        diagnostics=diag,
        eta_sensitivity=sens,
        estimates=est,
        method=est.method,
    )


def fe_ols(panel, spec: FEIVSpec = FEIVSpec(), regime=None, omegas=(0.0,)) -> EstimationResult:
    """Fixed-effects OLS with the same HAC covariance."""
    return fe_iv(panel, replace(spec, instruments=()), regime=regime, omegas=omegas)
