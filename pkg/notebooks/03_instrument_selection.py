"""
Choosing third-country exchange-rate instruments
================================================

Each partner currency gets the candidates from other regions whose monthly
log changes against the base currency correlate most strongly with its own.
"""

# %%
import numpy as np

from tradeiv import DGPParams, simulate_panel
from tradeiv.dgp import to_sources
from tradeiv.instruments import assignments_frame, rank_candidates
from tradeiv.panel import log_cross_rates

synth = simulate_panel(DGPParams(kappa=0.0, n_months=48, seed=3))
trade, fx, lme, regions, currency_map = to_sources(synth)
print(currency_map)

# %%
# Cross rates in units of the base currency, then the ranking per partner.
candidates = sorted(c for c in regions if c not in currency_map.values() and c != "CDF")
cols = sorted(set(candidates) | set(currency_map.values()))
levels = np.exp(log_cross_rates(fx, cols, base="CDF"))
picks = [rank_candidates(cur, levels, regions, k=2, candidates=candidates) for cur in sorted(currency_map.values())]
print(assignments_frame(picks).to_string(index=False))
