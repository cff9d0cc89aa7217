"""Optimal fair power allocation for NOMA downlink.

Max-min rate with instantaneous CSI, min-max outage with average CSI,
TDMA and fixed-split baselines, and a Monte Carlo checker.
"""

from .baselines import fixed_noma_allocation, fixed_noma_outage, tdma_maxmin, tdma_outage
from .maxmin import allocate_for_rate, solve_maxmin
from .model import (
    ChannelRealization,
    DomainError,
    InvalidConfig,
    PowerAllocation,
    SolverResult,
    SystemConfig,
    TdmaAllocation,
    db_to_linear,
    linear_to_db,
    validate_config,
)
from .montecarlo import estimate_min_rate_cdf, estimate_outage
from .noma_core import achievable_rate, decoding_thresholds, min_own_rate, outage_probabilities
from .ordered_channel import ordered_cdf, ordered_cdf_inverse, sample_gains
from .outage import allocate_for_outage, solve_minmax_outage

__version__ = "0.1.0"
