"""End-to-end runs driven by a flat ``key = value`` configuration file.

Recognised keys::

    trade, fx, lme, regions, regimes     paths (relative to the config file)
    out                                  output directory
    base_currency                        default CDF
    k, bandwidth                         instrument count, HAC lag length
    omega_sensitivity                    comma list, default 0, 0.089
    candidates                           optional comma list of instrument currencies
    currency.<PARTNER> = <CODE>          partner to currency mapping
    seed, reps, estimators               simulate / mc
    dgp.<field> = <value>                any DGPParams field
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd

from . import dgp as dgp_lab
from .errors import ConfigError, CoverageError, UndefinedShareError
from .feiv import FEIVSpec, fe_iv
from .instruments import assignments_frame, rank_candidates, read_regions
from .panel import (
    DEFAULT_REGIMES,
    build_panel,
    compute_shares,
    fx_wide,
    load_sources,
    log_cross_rates,
    read_fx,
    read_regimes,
    read_trade,
    split_by_regime,
    validate_regimes,
)
from .report import format_results_table, format_supply_table, results_frame, supply_frame
from .structural import estimate_supply

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    trade: Path | None = None
    fx: Path | None = None
    lme: Path | None = None
    regions: Path | None = None
    regimes: Path | None = None
    out: Path = Path("out")
    base_currency: str = "CDF"
    currency_map: dict = field(default_factory=dict)
    k: int = 2
    bandwidth: int = 2
    omega_sensitivity: tuple = (0.0, 0.089)
    candidates: tuple | None = None
    seed: int = 12345
    reps: int = 500
    estimators: tuple = dgp_lab.ESTIMATORS
    dgp: dict = field(default_factory=dict)

    def require(self, *names):
        """Check that the named path settings are present and exist."""
        for name in names:
            path = getattr(self, name)
            if path is None:
                raise ConfigError(f"config key {name!r} is required")
            if not Path(path).exists():
                raise ConfigError(f"{name} file not found: {path}")

    def regime_list(self):
        if self.regimes is None:
            return list(DEFAULT_REGIMES)
        self.require("regimes")
        return validate_regimes(read_regimes(self.regimes))

    def dgp_params(self):
        return _dgp_from_strings(self.dgp, seed=self.seed)


_PATH_KEYS = ("trade", "fx", "lme", "regions", "regimes", "out")


def _split_list(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _dgp_from_strings(values, seed):
    known = {f.name: f for f in fields(dgp_lab.DGPParams)}
    kwargs = {"seed": seed}
    for key, text in values.items():
        if key not in known:
            raise ConfigError(f"unknown DGP parameter {key!r}")
        if key in ("alpha", "tau"):
            kwargs[key] = tuple(float(x) for x in _split_list(text))
        elif key in ("n_partners", "n_months", "n_instruments", "seed"):
            kwargs[key] = int(text)
        elif key == "start":
            kwargs[key] = text
        else:
            kwargs[key] = float(text)
    try:
        params = dgp_lab.DGPParams(**kwargs)
        params.beta  # singular configurations fail here
        return params
    except ValueError as exc:
        raise ConfigError(f"invalid DGP parameters: {exc}") from None


def parse_config(path, **overrides) -> RunConfig:
    """Read a config file; keyword ``overrides`` that are not None win."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    root = path.parent
    cfg = RunConfig()
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _PATH_KEYS:
                setattr(cfg, key, (root / value) if not Path(value).is_absolute() else Path(value))
            elif key.startswith("currency."):
                cfg.currency_map[key[len("currency."):]] = value
            elif key.startswith("dgp."):
                cfg.dgp[key[len("dgp."):]] = value
            elif key in ("k", "bandwidth", "seed", "reps"):
                setattr(cfg, key, int(value))
            elif key == "base_currency":
                cfg.base_currency = value
            elif key == "omega_sensitivity":
                cfg.omega_sensitivity = tuple(float(x) for x in _split_list(value))
            elif key == "candidates":
                cfg.candidates = _split_list(value)
            elif key == "estimators":
                cfg.estimators = _split_list(value)
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, Path(value) if key in _PATH_KEYS else value)
    if cfg.bandwidth < 0:
        raise ConfigError("bandwidth must be nonnegative")
    if cfg.k < 1:
        raise ConfigError("k must be at least 1")
    return cfg


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, frame):
    atomic_write_text(path, frame.to_csv(index=False, float_format="%.17g", lineterminator="\n"))


def load_panel(cfg: RunConfig):
    cfg.require("trade", "fx", "lme")
    regimes = cfg.regime_list()
    src = load_sources(cfg.trade, cfg.fx, cfg.lme)
    panel = build_panel(src.trade, src.fx, src.lme, cfg.currency_map, regimes, base=cfg.base_currency)
    return src, panel, regimes


def select_all_instruments(cfg: RunConfig, fx, currencies):
    """Rank third-country instruments for every partner currency."""
    cfg.require("regions")
    regions = read_regions(cfg.regions)
    wide = fx_wide(fx)
    pool = list(cfg.candidates) if cfg.candidates else [c for c in wide.columns if c in regions]
    pool = [c for c in pool if c != cfg.base_currency]
    missing = [c for c in pool if c not in regions]
    if missing:
        raise ConfigError(f"candidate currencies without a region: {missing}")
    cols = sorted(set(pool) | set(currencies))
    levels = np.exp(log_cross_rates(fx, cols, base=cfg.base_currency))
    return [rank_candidates(cur, levels, regions, k=cfg.k, candidates=pool) for cur in sorted(currencies)]


def attach_instruments(panel, assignments, fx, currency_map, base="CDF", k=2):
    """Add columns ``z1..zk``: log cross rates of each partner's instruments."""
    by_target = {a.target: a for a in assignments}
    needed = sorted({c for a in assignments for c in a.currencies})
    ln_rates = log_cross_rates(fx, needed, base=base)
    out = panel.copy()
    for r in range(k):
        col = np.full(len(out), np.nan)
        for i, (partner, month) in enumerate(zip(out["partner"], out["month"])):
            a = by_target[currency_map[partner]]
            cur = a.currencies[r]
            if month in ln_rates.index:
                col[i] = ln_rates.at[month, cur]
        out[f"z{r + 1}"] = col
    gaps = out.loc[~np.isfinite(out[[f"z{r + 1}" for r in range(k)]]).all(axis=1), ["partner", "month"]]
    if len(gaps):
        raise CoverageError(
            f"instrument exchange rates missing for {len(gaps)} partner-months",
            gaps=[f"{p} {m}" for p, m in gaps.itertuples(index=False)],
        )
    return out


def run_estimate(cfg: RunConfig):
    """Estimate every nonempty regime; returns ``(results, assignments)``."""
    src, panel, regimes = load_panel(cfg)
    currencies = sorted({cfg.currency_map[p] for p in panel["partner"].unique()})
    assignments = select_all_instruments(cfg, src.fx, currencies)
    panel = attach_instruments(panel, assignments, src.fx, cfg.currency_map, cfg.base_currency, cfg.k)
    spec = FEIVSpec(instruments=tuple(f"z{r + 1}" for r in range(cfg.k)), bandwidth=cfg.bandwidth)
    results = []
    for name, sub in split_by_regime(panel, regimes).items():
        if sub.empty:
            log.warning("regime %s has no observations; skipped", name)
            continue
        results.append(fe_iv(sub, spec, regime=name, omegas=cfg.omega_sensitivity))
    return results, assignments


def cmd_estimate(cfg: RunConfig):
    results, assignments = run_estimate(cfg)
    table = format_results_table(results, cfg.omega_sensitivity)
    write_csv(cfg.out / "results.csv", results_frame(results))
    write_csv(cfg.out / "instruments.csv", assignments_frame(assignments))
    atomic_write_text(cfg.out / "results.txt", table)
    return table


def cmd_supply(cfg: RunConfig):
    _, panel, _ = load_panel(cfg)
    s = estimate_supply(panel, bandwidth=cfg.bandwidth)
    table = format_supply_table(s)
    write_csv(cfg.out / "supply.csv", supply_frame(s))
    atomic_write_text(cfg.out / "supply.txt", table)
    return table


def regime_shares(trade, regimes):
    rows = []
    for r in regimes:
        try:
            shares = compute_shares(trade, r.start, r.end)
        except UndefinedShareError:
            log.warning("no trade in %s; omitted from shares", r.name)
            continue
        rows += [(r.name, p, s) for p, s in shares.items()]
    return pd.DataFrame(rows, columns=["period", "partner", "share"])


def cmd_shares(cfg: RunConfig):
    cfg.require("trade")
    trade, _ = read_trade(cfg.trade)
    frame = regime_shares(trade, cfg.regime_list())
    write_csv(cfg.out / "shares.csv", frame)
    return frame


def cmd_select_instruments(cfg: RunConfig):
    cfg.require("fx")
    fx = read_fx(cfg.fx)
    currencies = sorted(set(cfg.currency_map.values()))
    if not currencies:
        raise ConfigError("no partner currencies configured (currency.<PARTNER> = CODE)")
    frame = assignments_frame(select_all_instruments(cfg, fx, currencies))
    write_csv(cfg.out / "instruments.csv", frame)
    return frame


def cmd_simulate(cfg: RunConfig):
    """Write one synthetic panel as source files plus a ready-to-run config."""
    params = cfg.dgp_params()
    synth = dgp_lab.simulate_panel(params)
    trade, fx, lme, regions, cmap = dgp_lab.to_sources(synth)
    out = cfg.out
    trade = trade.assign(month=trade["month"].astype(str))
    fx = fx.assign(month=fx["month"].astype(str))
    write_csv(out / "trade.csv", trade)
    write_csv(out / "fx.csv", fx)
    write_csv(out / "lme.csv", pd.DataFrame({"month": lme.index.astype(str), "usd_per_tonne": lme.to_numpy()}))
    write_csv(out / "regions.csv", pd.DataFrame(sorted(regions.items()), columns=["currency", "region"]))
    write_csv(
        out / "truth.csv",
        synth.panel.assign(month=synth.panel["month"].astype(str), ln_p_exp=synth.ln_p_exp, u=synth.u, v=synth.v),
    )
    lines = [
        "trade = trade.csv",
        "fx = fx.csv",
        "lme = lme.csv",
        "regions = regions.csv",
        "out = results",
        f"k = {params.n_instruments}",
        f"bandwidth = {cfg.bandwidth}",
        *[f"currency.{p} = {c}" for p, c in sorted(cmap.items())],
    ]
    atomic_write_text(out / "config.cfg", "\n".join(lines) + "\n")
    truth = {"eta": params.eta, "omega": params.omega, "beta": params.beta, "seed": params.seed}
    atomic_write_text(out / "truth.json", json.dumps(truth, indent=2, sort_keys=True) + "\n")
    return truth


def cmd_mc(cfg: RunConfig):
    if cfg.reps < 2:
        raise ConfigError(f"reps must be at least 2 (got {cfg.reps}); the MC variance is undefined otherwise")
    params = cfg.dgp_params()
    summary = dgp_lab.monte_carlo(params, cfg.reps, estimators=cfg.estimators, seed=cfg.seed)
    text = json.dumps(summary.to_dict(), indent=2, sort_keys=True, default=_json_default) + "\n"
    atomic_write_text(cfg.out / "mc_summary.json", text)
    return summary


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(type(obj))
