"""Synthetic panels with known structural parameters, and a Monte Carlo harness.

For each partner ``j`` and month ``t``:

* a latent exchange-rate factor ``f`` follows a driftless random walk;
* ``ln_e = f + kappa * u + noise`` (``kappa`` makes the rate endogenous);
* each excluded instrument is ``loading * f + independent noise``;
* the LME log price is an independent random walk;
* demand and inverse supply are solved jointly::

      ln_x = (alpha_j + lam * p + (1 + eta) * (ln_e + delta + gamma * p + v) + u) / D
      ln_p_exp = delta + omega * ln_x + gamma * p + v
      D = 1 - omega * (1 + eta)

  with ``u`` a partner-month demand shock and ``v`` a month supply shock.
* ``ln_uv = ln_p_exp + log(tau_j)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from .errors import DomainError, SingularityError, TradeIVError
from .feiv import FEIVSpec, fe_iv, fe_ols
from .panel import DEFAULT_REGIMES
from .structural import beta_from_eta, epsilon_from_omega, estimate_supply


@dataclass
class DGPParams:
    eta: float = -3.47
    omega: float = 0.0
    delta: float = 0.0
    n_partners: int = 6
    n_months: int = 40
    alpha: tuple | None = None
    tau: tuple | None = None
    sigma_u: float = 0.5
    sigma_v: float = 0.1
    fx_sigma: float = 0.05
    fx_noise: float = 0.02
    fx_level_sd: float = 0.5
    iv_loading: float = 1.0
    iv_noise: float = 0.02
    n_instruments: int = 2
    kappa: float = 0.0
    lme_sigma: float = 0.05
    lme_level: float = math.log(20000.0)
    lme_loading: float = 1.0
    lme_passthrough: float = 0.0
    start: str = "2010-05"
    seed: int = 12345

    def __post_init__(self):
        if self.n_months < 3:
            raise DomainError("need at least 3 months")
        if self.n_partners < 1:
            raise DomainError("need at least one partner")
        if self.n_instruments < 1:
            raise DomainError("need at least one instrument")
        if not 0.0 <= self.omega < 1.0:
            raise DomainError("omega must lie in [0, 1)")
        for name in ("sigma_u", "sigma_v", "fx_sigma", "fx_noise", "fx_level_sd", "iv_noise", "lme_sigma"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be nonnegative")
        if self.alpha is None:
            self.alpha = tuple(12.0 + 0.5 * j for j in range(self.n_partners))
        if self.tau is None:
            self.tau = (1.1,) * self.n_partners
        self.alpha, self.tau = tuple(self.alpha), tuple(self.tau)
        if len(self.alpha) != self.n_partners or len(self.tau) != self.n_partners:
            raise DomainError("alpha and tau need one entry per partner")
        if min(self.tau) < 1.0:
            raise DomainError("iceberg costs must be at least 1")

    @property
    def denominator(self):
        return 1.0 - self.omega * (1.0 + self.eta)

    @property
    def beta(self):
        return beta_from_eta(self.eta, self.omega)

    @property
    def epsilon(self):
        return epsilon_from_omega(self.omega)

    @property
    def partners(self):
        return [f"P{j + 1:02d}" for j in range(self.n_partners)]

    @property
    def instrument_names(self):
        return tuple(f"z{i + 1}" for i in range(self.n_instruments))


@dataclass
class SyntheticPanel:
    """Observable panel plus the hidden draws that generated it."""

    panel: pd.DataFrame
    ln_p_exp: np.ndarray
    u: np.ndarray
    v: np.ndarray
    factor: np.ndarray
    instruments: np.ndarray
    params: DGPParams

    @property
    def beta(self):
        return self.params.beta


def simulate_panel(params: DGPParams, seed=None) -> SyntheticPanel:
    """Draw one panel. ``seed`` overrides ``params.seed`` (int or SeedSequence)."""
    p = params
    D = p.denominator
    if D == 0.0:
        raise SingularityError("1 - omega(1 + eta) = 0")
    rng = np.random.default_rng(p.seed if seed is None else seed)
    J, T, K = p.n_partners, p.n_months, p.n_instruments

    level = rng.normal(0.0, p.fx_level_sd, size=(J, 1))
    factor = level + np.cumsum(rng.normal(0.0, p.fx_sigma, size=(J, T)), axis=1)
    u = rng.normal(0.0, p.sigma_u, size=(J, T))
    v = rng.normal(0.0, p.sigma_v, size=T)
    ln_e = factor + p.kappa * u + rng.normal(0.0, p.fx_noise, size=(J, T))
    z = p.iv_loading * factor[:, :, None] + rng.normal(0.0, p.iv_noise, size=(J, T, K))
    lme = p.lme_level + np.cumsum(rng.normal(0.0, p.lme_sigma, size=T))

    alpha = np.asarray(p.alpha)[:, None]
    one_eta = 1.0 + p.eta
    ln_x = (
        alpha
        + p.lme_loading * lme
        + one_eta * (ln_e + p.delta + p.lme_passthrough * lme + v)
        + u
    ) / D
    ln_p_exp = p.delta + p.omega * ln_x + p.lme_passthrough * lme + v
    ln_uv = ln_p_exp + np.log(np.asarray(p.tau))[:, None]

    months = pd.period_range(p.start, periods=T, freq="M")
    regime = []
    for m in months:
        label = next((r.name for r in DEFAULT_REGIMES if r.contains(m)), "")
        regime.append(label)

    data = {
        "partner": np.repeat(p.partners, T),
        "month": np.tile(months, J),
        "ln_x": ln_x.ravel(),
        "ln_e": ln_e.ravel(),
        "ln_p_lme": np.tile(lme, J),
        "ln_uv": ln_uv.ravel(),
        "regime": np.tile(regime, J),
    }
    for i, name in enumerate(p.instrument_names):
        data[name] = z[:, :, i].ravel()
    return SyntheticPanel(
        panel=pd.DataFrame(data),
        ln_p_exp=ln_p_exp.ravel(),
        u=u.ravel(),
        v=np.tile(v, J),
        factor=factor.ravel(),
        instruments=z.reshape(J * T, K),
        params=p,
    )


def to_sources(synth: SyntheticPanel, base_per_usd=900.0):
    """Express a synthetic panel in the raw-source schemas.

    Returns ``(trade, fx, lme, regions, currency_map)``. Partner currencies
    are placed in region ``Asia`` and each partner's instrument currencies
    alternate between ``Europe`` and ``SouthAmerica``; all rates are quoted
    per USD against a deterministic base-currency path.
    """
    p = synth.params
    df = synth.panel
    months = pd.period_range(p.start, periods=p.n_months, freq="M")
    base_path = base_per_usd * 1.004 ** np.arange(p.n_months)
    base_by_month = dict(zip(months, base_path))

    value = np.exp(df["ln_x"].to_numpy())
    qty = value / np.exp(df["ln_uv"].to_numpy())
    trade = pd.DataFrame(
        {"partner": df["partner"], "month": df["month"], "value_usd": value, "quantity_kg": qty}
    )

    currency_map = {partner: f"C{partner[1:]}" for partner in p.partners}
    regions = {"CDF": "Africa"}
    rows = []
    base = df["month"].map(base_by_month).to_numpy()
    for partner, grp in df.groupby("partner", sort=True):
        idx = grp.index.to_numpy()
        cur = currency_map[partner]
        regions[cur] = "Asia"
        rows += zip([cur] * len(idx), grp["month"], np.exp(grp["ln_e"].to_numpy()) * base[idx])
        for i, name in enumerate(p.instrument_names):
            icur = f"Z{partner[1:]}{chr(ord('A') + i)}"
            regions[icur] = "Europe" if i % 2 == 0 else "SouthAmerica"
            rows += zip([icur] * len(idx), grp["month"], np.exp(grp[name].to_numpy()) * base[idx])
    rows += zip(["CDF"] * len(months), months, base_path)
    fx = pd.DataFrame(rows, columns=["currency", "month", "per_usd"])
    lme = pd.Series(np.exp(df.groupby("month")["ln_p_lme"].first()), name="usd_per_tonne")
    return trade, fx, lme, regions, currency_map


@dataclass
class MCSummary:
    """Summary statistics of a Monte Carlo run."""

    reps: int
    params: dict
    truth: dict
    estimates: dict = field(default_factory=dict)
    rejection: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _summarize(values, truth):
    a = np.asarray(values, dtype=float)
    n = a.size
    if n == 0:
        return {"n": 0, "mean": math.nan, "sd": math.nan, "mcse": math.nan, "bias": math.nan}
    sd = float(a.std(ddof=1)) if n > 1 else math.nan
    mean = float(a.mean())
    return {"n": n, "mean": mean, "sd": sd, "mcse": sd / math.sqrt(n), "bias": mean - truth}


ESTIMATORS = ("feiv", "feols", "supply")


def run_replication(params, seed, estimators=ESTIMATORS, alpha=0.05):
    """One replication; returns ``(record, failures)``."""
    synth = simulate_panel(params, seed=seed)
    spec = FEIVSpec(instruments=params.instrument_names)
    rec, failures = {}, []
    for name in estimators:
        try:
            if name == "feiv":
                r = fe_iv(synth.panel, spec, omegas=())
                d = r.diagnostics
                rec["feiv_beta"] = r.beta
                rec["feiv_se"] = r.beta_se
                rec["wald_reject"] = float(d.wald_eta_zero_p < alpha)
                rec["weak_id_f"] = d.weak_id_f
                if d.overid_df > 0:
                    rec["overid_reject"] = float(d.overid_p < alpha)
            elif name == "feols":
                r = fe_ols(synth.panel, spec, omegas=())
                rec["feols_beta"] = r.beta
            elif name == "supply":
                s = estimate_supply(synth.panel, bandwidth=spec.bandwidth)
                rec["supply_omega"] = s.omega
                rec["supply_gamma"] = s.gamma
                rec["omega_reject"] = float(s.omega_p < alpha)
            else:
                raise DomainError(f"unknown estimator {name!r}")
        except TradeIVError as exc:
            failures.append({"estimator": name, "error": f"{type(exc).__name__}: {exc}"})
    return rec, failures


def monte_carlo(params: DGPParams, reps, estimators=ESTIMATORS, seed=None, alpha=0.05) -> MCSummary:
    """Repeat :func:`simulate_panel` and the chosen estimators ``reps`` times.

    Replication ``r`` uses the ``r``-th child of ``SeedSequence(seed)``, so
    results do not depend on execution order. Failed estimations are
    recorded in ``failures`` and excluded from the summaries.
    """
    if reps < 2:
        raise DomainError("need at least 2 replications")
    unknown = set(estimators) - set(ESTIMATORS)
    if unknown:
        raise DomainError(f"unknown estimators {sorted(unknown)}")
    master = np.random.SeedSequence(params.seed if seed is None else seed)
    children = master.spawn(reps)

    records = []
    failures = []
    for r, child in enumerate(children):
        rec, fails = run_replication(params, child, estimators, alpha)
        records.append(rec)
        failures += [{"rep": r, **f} for f in fails]

    def column(key):
        return [rec[key] for rec in records if key in rec]

    beta = params.beta
    truth = {"beta": beta, "eta": params.eta, "omega": params.omega}
    out = MCSummary(reps=reps, params=asdict(params), truth=truth, failures=failures)
    if "feiv" in estimators:
        out.estimates["feiv_beta"] = _summarize(column("feiv_beta"), beta)
        out.estimates["feiv_se"] = _summarize(column("feiv_se"), math.nan)
        out.estimates["weak_id_f"] = _summarize(column("weak_id_f"), math.nan)
        out.rejection["wald_eta_zero"] = _rate(column("wald_reject"))
        out.rejection["overid"] = _rate(column("overid_reject"))
    if "feols" in estimators:
        out.estimates["feols_beta"] = _summarize(column("feols_beta"), beta)
    if "supply" in estimators:
        out.estimates["supply_omega"] = _summarize(column("supply_omega"), params.omega)
        out.estimates["supply_gamma"] = _summarize(column("supply_gamma"), params.lme_passthrough)
        out.rejection["omega_zero"] = _rate(column("omega_reject"))
    return out


def _rate(flags):
    return float(np.mean(flags)) if flags else math.nan
