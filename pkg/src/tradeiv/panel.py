"""Source ingestion and construction of the monthly log panel.

Trade flows, exchange-rate quotes and the LME tin price are read from flat
CSV files, validated, and joined into one row per (partner, month) with the
logged variables used by the estimators.
"""

from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    ConfigError,
    CoverageError,
    DomainError,
    IntegrityError,
    ParseError,
    UndefinedShareError,
)

log = logging.getLogger(__name__)

_MONTH_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")

SAMPLE_WINDOW = (pd.Period("2010-05", "M"), pd.Period("2022-12", "M"))

PANEL_COLUMNS = ["partner", "month", "ln_x", "ln_e", "ln_p_lme", "ln_uv", "regime"]


def to_month(value) -> pd.Period:
    """Coerce ``'YYYY-MM'`` strings, timestamps or periods to a monthly period."""
    if isinstance(value, pd.Period):
        return value.asfreq("M")
    if isinstance(value, str):
        if not _MONTH_RE.match(value.strip()):
            raise ValueError(f"month must be YYYY-MM, got {value!r}")
        return pd.Period(value.strip(), "M")
    return pd.Period(value, "M")


@dataclass(frozen=True)
class RegimeSpec:
    """Named inclusive month interval."""

    name: str
    start: pd.Period
    end: pd.Period

    def __post_init__(self):
        object.__setattr__(self, "start", to_month(self.start))
        object.__setattr__(self, "end", to_month(self.end))
        if self.end < self.start:
            raise ConfigError(f"regime {self.name!r} ends before it starts")

    def contains(self, month) -> bool:
        return self.start <= to_month(month) <= self.end


DEFAULT_REGIMES = (
    RegimeSpec("Period 1", "2010-05", "2012-07"),
    RegimeSpec("Period 2", "2012-08", "2017-04"),
    RegimeSpec("Period 3", "2017-05", "2019-05"),
    RegimeSpec("Period 4", "2019-06", "2022-12"),
)


def validate_regimes(regimes, window=SAMPLE_WINDOW):
    """Check that ``regimes`` are disjoint and tile ``window`` without gaps."""
    ordered = sorted(regimes, key=lambda r: r.start)
    if not ordered:
        raise ConfigError("no regimes defined")
    names = [r.name for r in ordered]
    if len(set(names)) != len(names):
        raise ConfigError("regime names must be unique")
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start <= prev.end:
            raise ConfigError(f"regimes {prev.name!r} and {cur.name!r} overlap")
        if cur.start != prev.end + 1:
            raise ConfigError(f"gap between regimes {prev.name!r} and {cur.name!r}")
    if window is not None:
        if ordered[0].start > window[0] or ordered[-1].end < window[1]:
            raise ConfigError(
                f"regimes must cover the sample window {window[0]}..{window[1]}"
            )
    return list(regimes)


def assign_regime(month, regimes=DEFAULT_REGIMES):
    m = to_month(month)
    for r in regimes:
        if r.contains(m):
            return r.name
    raise CoverageError(f"month {m} is not covered by any regime", gaps=[str(m)])


@dataclass
class Sources:
    """Validated raw inputs.

    ``trade`` has columns partner, month, value_usd, quantity_kg;
    ``fx`` has currency, month, per_usd; ``lme`` is indexed by month.
    ``dropped`` counts trade rows discarded by reason.
    """

    trade: pd.DataFrame
    fx: pd.DataFrame
    lme: pd.Series
    dropped: dict = field(default_factory=dict)


def _read_rows(path, required):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(path, 1, f"missing columns {missing}")
        reader.fieldnames = header
        for row in reader:
            if None in row or any(row.get(c) is None for c in required):
                raise ParseError(path, reader.line_num, "wrong number of fields")
            yield reader.line_num, {k: (v or "").strip() for k, v in row.items()}


def _parse_month(path, line, text):
    try:
        return to_month(text)
    except ValueError as exc:
        raise ParseError(path, line, str(exc)) from None


def _parse_number(path, line, text, name, *, blank_ok=False):
    if text == "":
        if blank_ok:
            return math.nan
        raise ParseError(path, line, f"{name} is blank")
    try:
        value = float(text)
    except ValueError:
        raise ParseError(path, line, f"{name} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(path, line, f"{name} is not finite: {text!r}")
    return value


def read_trade(path, window=SAMPLE_WINDOW):
    """Parse ``trade.csv``; returns ``(frame, dropped_counts)``."""
    seen = set()
    rows = []
    dropped = {"nonpositive_value": 0, "outside_window": 0}
    for line, row in _read_rows(path, ["partner", "month", "value_usd", "quantity_kg"]):
        partner = row["partner"]
        if not partner:
            raise ParseError(path, line, "partner is blank")
        month = _parse_month(path, line, row["month"])
        key = (partner, month)
        if key in seen:
            raise IntegrityError(f"{path}:{line}: duplicate (partner, month) {partner} {month}")
        seen.add(key)
        value = _parse_number(path, line, row["value_usd"], "value_usd", blank_ok=True)
        qty = _parse_number(path, line, row["quantity_kg"], "quantity_kg", blank_ok=True)
        if value < 0:
            raise ParseError(path, line, "value_usd is negative")
        if qty < 0:
            raise ParseError(path, line, "quantity_kg is negative")
        if not value > 0:
            dropped["nonpositive_value"] += 1
            continue
        if window is not None and not (window[0] <= month <= window[1]):
            dropped["outside_window"] += 1
            continue
        rows.append((partner, month, value, qty))
    frame = pd.DataFrame(rows, columns=["partner", "month", "value_usd", "quantity_kg"])
    if dropped["nonpositive_value"] or dropped["outside_window"]:
        log.info("trade rows dropped: %s", dropped)
    return frame, dropped


def read_fx(path):
    seen = set()
    rows = []
    for line, row in _read_rows(path, ["currency", "month", "per_usd"]):
        cur = row["currency"]
        if not cur:
            raise ParseError(path, line, "currency is blank")
        month = _parse_month(path, line, row["month"])
        rate = _parse_number(path, line, row["per_usd"], "per_usd")
        if rate <= 0:
            raise ParseError(path, line, "per_usd must be positive")
        if (cur, month) in seen:
            raise IntegrityError(f"{path}:{line}: duplicate (currency, month) {cur} {month}")
        seen.add((cur, month))
        rows.append((cur, month, rate))
    return pd.DataFrame(rows, columns=["currency", "month", "per_usd"])


def read_lme(path):
    months = {}
    for line, row in _read_rows(path, ["month", "usd_per_tonne"]):
        month = _parse_month(path, line, row["month"])
        price = _parse_number(path, line, row["usd_per_tonne"], "usd_per_tonne")
        if price <= 0:
            raise ParseError(path, line, "usd_per_tonne must be positive")
        if month in months:
            raise IntegrityError(f"{path}:{line}: duplicate month {month}")
        months[month] = price
    return pd.Series(months, name="usd_per_tonne", dtype=float).sort_index()


def read_regimes(path):
    out = []
    for line, row in _read_rows(path, ["name", "start", "end"]):
        out.append(
            RegimeSpec(
                row["name"],
                _parse_month(path, line, row["start"]),
                _parse_month(path, line, row["end"]),
            )
        )
    return out


def load_sources(trade_path, fx_path, lme_path, window=SAMPLE_WINDOW) -> Sources:
    trade, dropped = read_trade(trade_path, window=window)
    return Sources(trade=trade, fx=read_fx(fx_path), lme=read_lme(lme_path), dropped=dropped)


def cross_rate(currency_per_usd, cdf_per_usd):
    """Units of the importer currency per unit of the base currency.

    Both inputs are quoted against the US dollar, so the dollar cancels.

    >>> round(cross_rate(4.20, 900.0), 7)
    0.0046667
    """
    if not (currency_per_usd > 0 and cdf_per_usd > 0):
        raise DomainError("exchange rates must be positive")
    return currency_per_usd / cdf_per_usd


def fx_wide(fx: pd.DataFrame) -> pd.DataFrame:
    """Pivot quotes to a month x currency table; USD is implicitly 1."""
    wide = fx.pivot(index="month", columns="currency", values="per_usd").sort_index()
    if "USD" not in wide.columns:
        wide["USD"] = 1.0
    return wide


def log_cross_rates(fx: pd.DataFrame, currencies, base="CDF") -> pd.DataFrame:
    """Log cross rates of ``currencies`` against ``base`` (month x currency).

    Months where either quote is missing are left as NaN.
    """
    wide = fx_wide(fx)
    if base not in wide.columns:
        raise CoverageError(f"no quotes for base currency {base}", gaps=[base])
    missing = [c for c in currencies if c not in wide.columns]
    if missing:
        raise CoverageError(f"no quotes for currencies {missing}", gaps=missing)
    return np.log(wide[list(currencies)].div(wide[base], axis=0))


def build_panel(trade, fx, lme, currency_map, regimes=DEFAULT_REGIMES, base="CDF"):
    """Join sources into the estimation panel.

    Parameters
    ----------
    trade, fx : pandas.DataFrame
        As returned by :func:`load_sources`.
    lme : pandas.Series
        LME cash price in USD per tonne, indexed by month.
    currency_map : mapping
        Partner code to currency code. Every partner in ``trade`` must appear.
    regimes : sequence of RegimeSpec
    base : str
        Exporter currency that bilateral rates are quoted against.

    Returns
    -------
    pandas.DataFrame
        Columns ``PANEL_COLUMNS``, one row per (partner, month), sorted.
    """
    partners = sorted(trade["partner"].unique())
    unmapped = [p for p in partners if p not in currency_map]
    if unmapped:
        raise ConfigError(f"partners without a currency mapping: {unmapped}")
    if trade.empty:
        return pd.DataFrame(columns=PANEL_COLUMNS)

    currencies = sorted({currency_map[p] for p in partners})
    ln_rates = log_cross_rates(fx, currencies, base=base)

    gaps = []
    ln_e = np.empty(len(trade))
    ln_p = np.empty(len(trade))
    for i, (partner, month) in enumerate(zip(trade["partner"], trade["month"])):
        cur = currency_map[partner]
        val = ln_rates[cur].get(month, np.nan) if month in ln_rates.index else np.nan
        if not np.isfinite(val):
            gaps.append(f"fx {cur}/{base} {month}")
        ln_e[i] = val
        price = lme.get(month, np.nan)
        if not (price > 0):
            gaps.append(f"lme {month}")
        ln_p[i] = np.log(price) if price > 0 else np.nan
    if gaps:
        raise CoverageError(
            f"missing exchange-rate or LME coverage for {len(gaps)} trade months: "
            + ", ".join(sorted(set(gaps))[:20]),
            gaps=sorted(set(gaps)),
        )

    uv = compute_unit_values(trade)
    panel = pd.DataFrame(
        {
            "partner": trade["partner"].to_numpy(),
            "month": trade["month"].to_numpy(),
            "ln_x": np.log(trade["value_usd"].to_numpy(dtype=float)),
            "ln_e": ln_e,
            "ln_p_lme": ln_p,
            "ln_uv": np.log(uv.to_numpy()),
            "regime": [assign_regime(m, regimes) for m in trade["month"]],
        }
    )
    return panel.sort_values(["partner", "month"], kind="mergesort").reset_index(drop=True)


def split_by_regime(panel, regimes=DEFAULT_REGIMES):
    """Partition ``panel`` by its regime label; every regime gets an entry."""
    out = {}
    for r in regimes:
        out[r.name] = panel[panel["regime"] == r.name].reset_index(drop=True)
    stray = set(panel["regime"]) - set(out)
    if stray:
        raise CoverageError(f"panel carries unknown regime labels {sorted(stray)}")
    return out


def compute_shares(trade, start, end):
    """Partner shares of total export value over months ``start..end``."""
    start, end = to_month(start), to_month(end)
    if end < start:
        raise DomainError("empty period")
    mask = (trade["month"] >= start) & (trade["month"] <= end)
    totals = trade.loc[mask].groupby("partner")["value_usd"].sum()
    totals = totals[totals > 0]
    grand = float(totals.sum())
    if not grand > 0:
        raise UndefinedShareError(f"no trade between {start} and {end}")
    return {p: float(v) / grand for p, v in totals.sort_index().items()}


def compute_unit_values(trade) -> pd.Series:
    """USD per kg where a positive quantity is reported, NaN otherwise."""
    qty = trade["quantity_kg"].astype(float)
    value = trade["value_usd"].astype(float)
    return (value / qty.where(qty > 0)).rename("unit_value")
