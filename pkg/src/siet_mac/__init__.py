"""Information-energy regions of the K-user Gaussian MAC with an energy harvester.

Centralized capacity region, eta-Nash equilibrium regions under SUD, SIC and
time-sharing receivers, best-response dynamics, and a Monte Carlo check of the
harvested energy rate.
"""

from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .model import (
    DEFAULT_TOL,
    ChannelConfig,
    SnrTable,
    b_coop,
    b_ind,
    config_from_dict,
    energy_max,
    is_feasible,
    load_config,
    power_split,
    regime,
    snr_table,
    validate_config,
)
from .regions import (
    BscParams,
    RateTuple,
    binary_entropy,
    bsc_info_energy_capacity,
    capacity_contains,
    capacity_witness,
    region_boundary_samples,
    sum_rate_bound,
)
from .equilibria import (
    DecoderSpec,
    EquilibriumPoint,
    GameParams,
    best_response,
    best_response_dynamics,
    check_eta_ne,
    equilibrium_point,
    is_eta_ne,
    ne_rates_sic,
    ne_rates_sud,
    ne_region_contains,
    ne_region_samples,
    solve_beta_directional,
    solve_beta_uniform,
)
from .simulation import SimulationConfig, SimulationResult, empirical_correlation, simulate_energy

__version__ = "0.1.0"
