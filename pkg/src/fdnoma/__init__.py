"""Full-duplex cooperative NOMA over Rician fading with hardware impairments.

Outage probabilities are available as a truncated series, as quadrature of
the underlying integral and by Monte Carlo simulation; ergodic rates by
simulation and by their high-SNR limits.
"""

from .analytics import (OutageResult, ThresholdCoefficients, diversity_order_estimate,
                        er_far_high_snr, er_near_high_snr, esr_high_snr, mean_gain_series,
                        op_far_asymptotic, op_far_quadrature, op_far_series,
                        op_near_asymptotic, op_near_quadrature, op_near_series,
                        threshold_coefficients)
from .channel import (ParameterError, RicianParams, SeriesControl, SeriesConvergenceError,
                      rician_ccdf, rician_cdf, rician_pdf, sample_gain)
from .montecarlo import (McEstimate, McSettings, mc_ergodic_rates, mc_ordering_probability,
                         mc_outage, sample_link_gains)
from .system_model import (ConfigError, Duplex, LinkGains, NetworkConfig, SnrPoint,
                           sinr_far_user, sinr_near_user_far_signal, sinr_near_user_own,
                           sinr_relay_far, sinr_relay_near)

__version__ = "0.1.0"
