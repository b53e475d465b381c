"""Formatted tables and long-format CSV frames for estimation results."""

from __future__ import annotations

import math

import pandas as pd


def stars(p):
    if p is None or math.isnan(p):
        return ""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def fmt(x, digits=2):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "."
    return f"{x:.{digits}f}"


def results_frame(results, endogenous_label="ln_e"):
    """Long table ``regime, term, statistic, value`` at full precision."""
    rows = []
    for r in results:
        for name in r.names:
            rows.append((r.regime, name, "coef", r.coef[name]))
            rows.append((r.regime, name, "se", r.se[name]))
            rows.append((r.regime, name, "p", r.p_value(name)))
        d = r.diagnostics
        rows.append((r.regime, "eta", "value", r.eta))
        rows.append((r.regime, "eta", "wald_stat", d.wald_eta_zero))
        rows.append((r.regime, "eta", "wald_p", d.wald_eta_zero_p))
        for w, e in r.eta_sensitivity.items():
            rows.append((r.regime, "eta", f"omega={w:g}", e))
        rows.append((r.regime, "model", "n", r.n))
        rows.append((r.regime, "model", "n_groups", r.n_groups))
        rows.append((r.regime, "model", "dropped_singletons", r.dropped_singletons))
        rows.append((r.regime, "model", "weak_id_f", d.weak_id_f))
        rows.append((r.regime, "model", "underid_lm", d.underid_lm))
        rows.append((r.regime, "model", "underid_lm_p", d.underid_lm_p))
        rows.append((r.regime, "model", "overid_j", d.overid_j))
        rows.append((r.regime, "model", "overid_df", d.overid_df))
        rows.append((r.regime, "model", "overid_p", d.overid_p))
    return pd.DataFrame(rows, columns=["regime", "term", "statistic", "value"])


def _row(label, cells, width):
    return f"{label:<36}" + "".join(f"{c:>{width}}" for c in cells)


def format_results_table(results, omegas=(0.0, 0.089), width=12):
    """Three-panel text table: reduced form, implied elasticity, diagnostics."""
    if not results:
        return "(no regimes estimated)\n"
    width = max(width, 2 + max(len(str(r.regime)) for r in results))
    endog = results[0].endogenous
    exog = [n for n in results[0].names if n != endog]
    lines = [_row("", [r.regime for r in results], width), "-" * (36 + width * len(results))]

    lines.append("Panel A: Reduced Form Estimates")
    labels = {"ln_e": "Exchange Rate (ln E)", "ln_p_lme": "LME Tin Price (ln P LME)"}
    for name in [endog, *exog]:
        lines.append(
            _row(
                labels.get(name, name),
                [fmt(r.coef[name]) + stars(r.p_value(name)) for r in results],
                width,
            )
        )
        lines.append(_row("", [f"({fmt(r.se[name])})" for r in results], width))

    lines.append("Panel B: Derived Demand Elasticity")
    lines.append(
        _row(
            "Elasticity (eta = beta - 1)",
            [fmt(r.eta) + stars(r.diagnostics.wald_eta_zero_p) for r in results],
            width,
        )
    )
    lines.append(
        _row("(Test of H0: eta = 0)", [f"[{fmt(r.diagnostics.wald_eta_zero_p, 3)}]" for r in results], width)
    )
    for w in omegas:
        if w == 0:
            continue
        lines.append(
            _row(f"Elasticity at omega = {w:g}", [fmt(r.eta_sensitivity.get(float(w))) for r in results], width)
        )

    lines.append("Panel C: Model Diagnostics")
    lines.append(_row("Observations", [str(r.n) for r in results], width))
    lines.append(_row("Number of Groups", [str(r.n_groups) for r in results], width))
    lines.append(_row("Weak Id. Test (F-stat)", [fmt(r.diagnostics.weak_id_f) for r in results], width))
    lines.append(_row("Overid. Test (p-val)", [fmt(r.diagnostics.overid_p, 3) for r in results], width))
    return "\n".join(lines) + "\n"


def supply_frame(s):
    rows = [
        ("ln_x", "coef", s.omega),
        ("ln_x", "se", s.omega_se),
        ("ln_x", "p", s.omega_p),
        ("ln_p_lme", "coef", s.gamma),
        ("ln_p_lme", "se", s.gamma_se),
        ("ln_p_lme", "p", s.gamma_p),
        ("const", "coef", s.intercept),
        ("const", "se", s.intercept_se),
        ("const", "p", s.intercept_p),
        ("model", "n", s.n),
        ("model", "r2_centered", s.r2_centered),
        ("model", "underid_lm", s.underid_lm),
        ("model", "underid_lm_p", s.underid_lm_p),
        ("model", "weak_id_f", s.weak_id_f),
        ("model", "epsilon", s.epsilon),
    ]
    return pd.DataFrame(rows, columns=["term", "statistic", "value"])


def format_supply_table(s):
    w = 14
    lines = [
        "2SLS Estimation: Inverse Supply Elasticity (omega)",
        f"{'Dependent Var.: ln UV':<40}{'Coeff.':>{w}}{'S.E.':>{w}}",
        "-" * (40 + 2 * w),
        f"{'Log Export Value (omega)':<40}{fmt(s.omega, 3) + stars(s.omega_p):>{w}}{'(' + fmt(s.omega_se, 3) + ')':>{w}}",
        f"{'Log LME Tin Price':<40}{fmt(s.gamma, 3) + stars(s.gamma_p):>{w}}{'(' + fmt(s.gamma_se, 3) + ')':>{w}}",
        f"{'Constant':<40}{fmt(s.intercept, 3) + stars(s.intercept_p):>{w}}{'(' + fmt(s.intercept_se, 3) + ')':>{w}}",
        "-" * (40 + 2 * w),
        f"{'Observations':<40}{s.n:>{w}}",
        f"{'Centered R2':<40}{fmt(s.r2_centered, 3):>{w}}",
        f"{'Underid. (LM p-val) / Weak Id. (F-stat)':<40}{fmt(s.underid_lm_p, 3):>{w}}{fmt(s.weak_id_f):>{w}}",
        f"{'Implied supply elasticity (1/omega - 1)':<40}{fmt(s.epsilon):>{w}}",
    ]
    return "\n".join(lines) + "\n"
