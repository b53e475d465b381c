"""Third-country exchange-rate instruments.

For every partner currency, candidate currencies from other regions are
ranked by the absolute correlation of their monthly log changes with the
target, and the strongest ``k`` are kept. The lagged bilateral rate used as
the instrument in the supply regression is also built here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ConfigError, DegenerateSeriesError, DomainError, ParseError, SelectionError


@dataclass(frozen=True)
class InstrumentAssignment:
    """Chosen instruments for one target currency.

    ``instruments`` holds ``(currency, correlation, region)`` triples ordered
    by decreasing absolute correlation.
    """

    target: str
    instruments: tuple
    method: str = "abs-corr-dlog"

    @property
    def currencies(self):
        return [c for c, _, _ in self.instruments]


def read_regions(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}")
    regions = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not {"currency", "region"} <= set(reader.fieldnames or []):
            raise ParseError(path, 1, "expected columns currency,region")
        for row in reader:
            cur, reg = (row["currency"] or "").strip(), (row["region"] or "").strip()
            if not cur or not reg:
                raise ParseError(path, reader.line_num, "blank currency or region")
            if cur in regions:
                raise ParseError(path, reader.line_num, f"duplicate currency {cur}")
            regions[cur] = reg
    return regions


def log_changes(series):
    """Month-on-month log differences; the output is one element shorter.

    Accepts a sequence or a :class:`pandas.Series`. For a series the index of
    the later month is kept.
    """
    if isinstance(series, pd.Series):
        values = series.to_numpy(dtype=float)
        if values.size < 2:
            raise DomainError("need at least two observations")
        if not np.all(values > 0):
            raise DomainError("series must be strictly positive")
        return pd.Series(np.diff(np.log(values)), index=series.index[1:], name=series.name)
    values = np.asarray(series, dtype=float)
    if values.size < 2:
        raise DomainError("need at least two observations")
    if not np.all(values > 0):
        raise DomainError("series must be strictly positive")
    return np.diff(np.log(values))


def correlation(a, b, min_overlap=3):
    """Pearson correlation on the overlapping, non-missing observations.

    Series are aligned on their index; plain arrays must have equal length.
    """
    if isinstance(a, pd.Series) and isinstance(b, pd.Series):
        joined = pd.concat([a, b], axis=1, join="inner").dropna()
        x, y = joined.iloc[:, 0].to_numpy(float), joined.iloc[:, 1].to_numpy(float)
    else:
        x, y = np.asarray(a, float), np.asarray(b, float)
        if x.shape != y.shape:
            raise DomainError("arrays must have equal length")
        ok = np.isfinite(x) & np.isfinite(y)
        x, y = x[ok], y[ok]
    if x.size < min_overlap:
        raise DegenerateSeriesError(f"overlap of {x.size} months is below {min_overlap}")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = dx @ dx, dy @ dy
    if sxx <= 0 or syy <= 0:
        raise DegenerateSeriesError("zero variance on the overlap")
    r = (dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def select_instruments(target, correlations, regions, k=2):
    """Pick the ``k`` most correlated candidates outside the target's region.

    Parameters
    ----------
    target : str
        Currency being instrumented.
    correlations : mapping
        Candidate currency to its correlation with ``target``.
    regions : mapping
        Currency to region label; must cover the target and all candidates.
    k : int

    Returns
    -------
    InstrumentAssignment
    """
    if k < 1:
        raise DomainError("k must be at least 1")
    if target not in regions:
        raise SelectionError(f"no region for target currency {target}")
    home = regions[target]
    pool = []
    for cur, r in correlations.items():
        if cur == target:
            continue
        if cur not in regions:
            raise SelectionError(f"no region for candidate currency {cur}")
        if regions[cur] == home:
            continue
        if not -1.0 <= r <= 1.0 or np.isnan(r):
            raise DomainError(f"correlation for {cur} outside [-1, 1]: {r}")
        pool.append((cur, float(r), regions[cur]))
    if len(pool) < k:
        raise SelectionError(
            f"{target}: only {len(pool)} candidates outside region {home!r}, need {k}"
        )
    pool.sort(key=lambda t: (-abs(t[1]), t[0]))
    return InstrumentAssignment(target, tuple(pool[:k]))


def rank_candidates(target, levels, regions, k=2, candidates=None):
    """Correlate log changes of ``levels`` columns with the target and select.

    ``levels`` is a month x currency frame of positive rates (for example
    cross rates against the exporter currency). Candidates whose changes are
    degenerate against the target are skipped.
    """
    if candidates is None:
        candidates = [c for c in levels.columns if c != target]
    tgt = log_changes(levels[target].dropna())
    corrs = {}
    for cur in candidates:
        if cur == target or cur not in levels.columns:
            continue
        if cur in regions and regions.get(target) == regions[cur]:
            continue
        try:
            corrs[cur] = correlation(tgt, log_changes(levels[cur].dropna()))
        except DomainError:
            continue
    return select_instruments(target, corrs, regions, k)


def assignments_frame(assignments):
    """Long table ``target, rank, instrument, correlation, region``."""
    rows = [
        (a.target, rank, cur, corr, reg)
        for a in assignments
        for rank, (cur, corr, reg) in enumerate(a.instruments, start=1)
    ]
    return pd.DataFrame(rows, columns=["target", "rank", "instrument", "correlation", "region"])


def lagged_instrument(panel, column="ln_e", on_gap="drop"):
    """One-month lag of ``column`` within each partner.

    Returns the rows of ``panel`` (partner, month) that have a lag, with the
    lagged value in ``L_<column>``. The first month of each partner has no
    lag. After a gap in months the first post-gap row is dropped
    (``on_gap='drop'``) or a :class:`DomainError` is raised (``'error'``).
    """
    if on_gap not in ("drop", "error"):
        raise DomainError("on_gap must be 'drop' or 'error'")
    name = f"L_{column}"
    if panel.empty:
        return pd.DataFrame(columns=["partner", "month", name])
    df = panel[["partner", "month", column]].sort_values(["partner", "month"], kind="mergesort")
    ordinal = df["month"].map(lambda m: m.ordinal).astype(float)
    step = ordinal.groupby(df["partner"]).diff()
    prev_value = df.groupby("partner")[column].shift(1)
    has_prev = step.notna()
    contiguous = step == 1
    if on_gap == "error" and bool((has_prev & ~contiguous).any()):
        bad = df.loc[has_prev & ~contiguous, ["partner", "month"]].iloc[0]
        raise DomainError(f"gap in months before {bad['partner']} {bad['month']}")
    out = df.loc[contiguous, ["partner", "month"]].copy()
    out[name] = prev_value[contiguous].to_numpy()
    return out.reset_index(drop=True)
