"""Mapping between reduced-form and structural trade elasticities.

With demand elasticity ``eta`` and inverse-supply slope ``omega``, the
exchange-rate coefficient of the export-value regression is

    beta = (1 + eta) / (1 - omega * (1 + eta))

and ``omega = 1 / (1 + epsilon)`` for supply elasticity ``epsilon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import first_stage, normal_two_sided_p, underid_lm
from .errors import DataError, DomainError, SingularityError
from .estimation import hac_vcov, tsls
from .instruments import lagged_instrument


def _check_omega(omega):
    if not 0.0 <= omega < 1.0:
        raise DomainError(f"omega must lie in [0, 1), got {omega}")


def beta_from_eta(eta, omega):
    _check_omega(omega)
    denom = 1.0 - omega * (1.0 + eta)
    if denom == 0.0:
        raise SingularityError(f"1 - omega(1 + eta) = 0 at eta={eta}, omega={omega}")
    return (1.0 + eta) / denom


def eta_from_beta(beta, omega=0.0):
    """Demand elasticity implied by a reduced-form coefficient.

    At ``omega = 0`` this is ``beta - 1``.
    """
    _check_omega(omega)
    scale = 1.0 + omega * beta
    if scale <= 0.0:
        raise SingularityError(
            f"1 + omega*beta = {scale:.6g} <= 0: no demand elasticity with a "
            "positive supply/demand denominator"
        )
    return beta / scale - 1.0


def epsilon_from_omega(omega):
    """Supply elasticity from the inverse-supply slope; ``omega = 0`` gives inf."""
    if omega == 0.0:
        return math.inf
    if not 0.0 < omega <= 1.0:
        raise DomainError(f"omega must lie in (0, 1], got {omega}")
    return 1.0 / omega - 1.0


def omega_from_epsilon(epsilon):
    if math.isinf(epsilon) and epsilon > 0:
        return 0.0
    if not epsilon >= 0.0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    return 1.0 / (1.0 + epsilon)


@dataclass
class StructuralParams:
    eta: float
    omega: float = 0.0
    epsilon: float | None = None
    delta: float = 0.0
    gamma_lme: float = 0.0
    alpha: dict = field(default_factory=dict)
    tau: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_omega(self.omega)
        if self.epsilon is None:
            self.epsilon = epsilon_from_omega(self.omega)
        elif not math.isclose(omega_from_epsilon(self.epsilon), self.omega, abs_tol=1e-12):
            raise DomainError("omega and epsilon are inconsistent")
        if any(t < 1.0 for t in self.tau.values()):
            raise DomainError("iceberg costs must be at least 1")

    @property
    def beta(self):
        return beta_from_eta(self.eta, self.omega)


@dataclass(frozen=True)
class AttenuationReport:
    abs_beta: float
    abs_one_plus_eta: float
    bound_holds: bool
    applicable: bool


def attenuation_report(eta, omega):
    """Compare ``|beta|`` with ``|1 + eta|`` for elastic demand and sloped supply.

    The comparison is only meaningful for ``1 + eta < 0`` and ``omega > 0``;
    otherwise ``applicable`` is False and ``bound_holds`` is False.
    """
    one_plus_eta = 1.0 + eta
    applicable = one_plus_eta < 0.0 and 0.0 < omega < 1.0
    try:
        abs_beta = abs(beta_from_eta(eta, omega))
    except DomainError:
        abs_beta = math.nan
    holds = bool(applicable and abs_beta < abs(one_plus_eta))
    return AttenuationReport(abs_beta, abs(one_plus_eta), holds, applicable)


@dataclass
class SupplyResult:
    omega: float
    omega_se: float
    gamma: float
    gamma_se: float
    intercept: float
    intercept_se: float
    n: int
    r2_centered: float
    weak_id_f: float
    underid_lm: float
    underid_lm_p: float
    bandwidth: int
    estimates: object = None

    @property
    def epsilon(self):
        if self.omega <= 0 or self.omega > 1:
            return math.nan
        return epsilon_from_omega(self.omega)

    @property
    def omega_p(self):
        return normal_two_sided_p(self.omega, self.omega_se)

    @property
    def gamma_p(self):
        return normal_two_sided_p(self.gamma, self.gamma_se)

    @property
    def intercept_p(self):
        return normal_two_sided_p(self.intercept, self.intercept_se)


def estimate_supply(panel, lagged=None, bandwidth=2):
    """2SLS of the inverse supply curve on the unit-value subsample.

    ``ln_uv`` is regressed on ``ln_x`` and ``ln_p_lme`` with a constant and no
    fixed effects; ``ln_x`` is instrumented by the one-month-lagged
    bilateral rate. ``lagged`` defaults to :func:`lagged_instrument` applied
    to the whole ``panel``, so the lag may come from a month without a unit
    value.
    """
    if lagged is None:
        lagged = lagged_instrument(panel, "ln_e")
    sub = panel[np.isfinite(panel["ln_uv"].astype(float))]
    sub = sub.merge(lagged, on=["partner", "month"], how="inner")
    sub = sub.sort_values(["partner", "month"], kind="mergesort").reset_index(drop=True)
    if sub.empty:
        raise DataError("no observations with both a unit value and a lagged exchange rate")

    n = len(sub)
    y = sub["ln_uv"].to_numpy(float)
    lme = sub["ln_p_lme"].to_numpy(float)
    const = np.ones(n)
    X = np.column_stack([sub["ln_x"].to_numpy(float), lme, const])
    Z = np.column_stack([sub["L_ln_e"].to_numpy(float), lme, const])
    groups, times = sub["partner"].to_numpy(), sub["month"].to_numpy()

    est = tsls(y, X, Z, ("ln_x", "ln_p_lme", "const"), ("L_ln_e", "ln_p_lme", "const"))
    est.vcov = hac_vcov(X, Z, est.residuals, groups, times, bandwidth)
    est.method = "2sls-hac"
    fs = first_stage(X[:, 0], Z[:, :1], Z[:, 1:], groups, times, bandwidth)
    lm, _, lm_p = underid_lm(X[:, 0], Z[:, :1], Z[:, 1:])
    dev = y - y.mean()
    r2 = 1.0 - float(est.residuals @ est.residuals) / float(dev @ dev)
    se = est.se
    return SupplyResult(
        omega=float(est.beta_hat[0]),
        omega_se=float(se[0]),
        gamma=float(est.beta_hat[1]),
        gamma_se=float(se[1]),
        intercept=float(est.beta_hat[2]),
        intercept_se=float(se[2]),
        n=n,
        r2_centered=r2,
        weak_id_f=fs.f_stat,
        underid_lm=lm,
        underid_lm_p=lm_p,
        bandwidth=bandwidth,
        estimates=est,
    )
