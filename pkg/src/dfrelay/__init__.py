"""Relay selection for decode-and-forward multi-hop networks under Rayleigh fading.

Selection strategies, closed-form achievable rates built on exponential
polynomials, and a reproducible Monte Carlo estimator.
"""

from .analytic import (
    Method,
    RateValue,
    analytic_rate,
    exp_scaled_e1,
    rate_adhoc,
    rate_block,
    rate_by_quadrature,
    rate_from_survival,
    rate_hop,
    rate_optimal_dp,
    rate_optimal_indep,
    rate_sliding,
    sum_rate_multiuser,
)
from .expsum import ExpPoly
from .kernels import BACKEND
from .model import (
    ConfigurationError,
    NetworkConfig,
    ParameterError,
    RelayPath,
    ResourceError,
    SnrTrellis,
    path_bottleneck,
    rate_of_snr,
    sample_trellis,
)
from .montecarlo import (
    RateEstimate,
    effectiveness,
    effectiveness_row,
    estimate_rate,
    estimate_sum_rate_multiuser,
)
from .strategies import (
    select,
    select_ad_hoc,
    select_block,
    select_brute_force,
    select_hop_by_hop,
    select_optimal,
    select_sliding,
)

__version__ = "0.1.0"
