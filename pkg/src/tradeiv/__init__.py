"""Fixed-effects IV estimation of export-demand elasticities from exchange-rate variation."""

from .diagnostics import chi2_sf, f_sf, overid_j, underid_lm, wald_eta_zero, weak_id_f
from .dgp import DGPParams, monte_carlo, simulate_panel
from .estimation import Design, hac_vcov, ols, tsls, within_transform
from .feiv import FEIVSpec, fe_iv, fe_ols
from .instruments import correlation, lagged_instrument, log_changes, select_instruments
from .panel import (
    DEFAULT_REGIMES,
    RegimeSpec,
    build_panel,
    compute_shares,
    compute_unit_values,
    cross_rate,
    load_sources,
    split_by_regime,
)
from .report import format_results_table, format_supply_table, results_frame
from .structural import (
    attenuation_report,
    beta_from_eta,
    epsilon_from_omega,
    estimate_supply,
    eta_from_beta,
)

__version__ = "0.1.0"
