"""Outage probabilities and high-SNR ergodic rates in closed and integral form.

Both users need the relay to decode x1 and x2, which happens exactly when

    rho_SR > xi + chi * rho_LI

so each outage probability is ``1 - (relay leg) * (destination leg)``. The
relay leg is available three ways here: a truncated multi-index series, an
adaptive quadrature over the loop-interference density, and (in
``montecarlo``) direct simulation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp, xlogy

from .channel import DEFAULT_SERIES, SeriesControl, rician_ccdf, rician_pdf
from .system_model import Duplex, NetworkConfig, SnrPoint

INF = math.inf

# Near-user series variants: (argument of the relay-leg exponential, multiple
# of K in the exponent). "xi-3k" is the one consistent with the far-user
# derivation and agrees with quadrature; the others are kept for comparison.
NEAR_VARIANTS = {
    "xi-3k": ("xi", 3),
    "chi-3k": ("chi", 3),
    "xi-1k": ("xi", 1),
    "chi-1k": ("chi", 1),
}
DEFAULT_NEAR_VARIANT = "xi-3k"


class DegenerateRateWarning(RuntimeWarning):
    """Both arguments of a high-SNR rate minimum diverge."""


def _ratio(num, den):
    return num / den if den > 0 else INF


@dataclass(frozen=True)
class ThresholdCoefficients:
    """Gain thresholds derived from the SINR targets.

    An infeasible coefficient (nonpositive defining denominator) is stored
    as ``inf``: no finite channel gain meets it.
    """

    xi1: float
    xi2: float
    xi: float
    chi: float
    psi: float
    phi1: float
    phi2: float
    phi: float

    @property
    def infeasible(self):
        return frozenset(n for n in ("xi1", "xi2", "xi", "chi", "psi", "phi1", "phi2", "phi")
                         if math.isinf(getattr(self, n)))

    def feasible(self, name):
        return name not in self.infeasible


def threshold_coefficients(cfg: NetworkConfig, snr: SnrPoint) -> ThresholdCoefficients:
    g, gp = snr.gamma, snr.gamma_prime
    thf, thn = cfg.gamma_thf, cfg.gamma_thn
    ksr2, kf2, kn2 = cfg.kappa_sr ** 2, cfg.kappa_rdf ** 2, cfg.kappa_rdn ** 2

    xi1 = _ratio(thf, cfg.a1 * g - (cfg.a2 + ksr2) * g * thf)
    xi2 = _ratio(thn, cfg.a2 * g - (cfg.a1 * cfg.epsilon + ksr2) * g * thn)
    xi = max(xi1, xi2)
    w2 = cfg.varpi ** 2
    if w2 == 0:
        chi = 0.0
    else:
        chi = w2 * gp * (ksr2 + 1) * xi
    psi = _ratio(thf, cfg.b1 * gp - (cfg.b2 + kf2) * gp * thf)
    phi1 = _ratio(thf, cfg.b1 * gp - (cfg.b2 + kn2) * gp * thf)
    phi2 = _ratio(thn, cfg.b2 * gp - (cfg.epsilon * cfg.b1 + kn2) * gp * thn)
    phi = max(phi1, phi2)
    return ThresholdCoefficients(xi1, xi2, xi, chi, psi, phi1, phi2, phi)


@dataclass(frozen=True)
class OutageResult:
    value: float
    method: str
    terms_used: dict = field(default_factory=dict)
    converged: bool = True

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"outage probability out of range: {self.value}")


def _certain_outage(method):
    return OutageResult(1.0, method, {}, True)


def _clamp(v):
    return min(max(float(v), 0.0), 1.0)


# --------------------------------------------------------------------------
# series form

def _log_l1_sums(k, s_ratio, u_max, s):
    """log of sum_l1 K**l1 (l1+u)! s**l1 / (l1!)**2 for u = 0..u_max."""
    u = np.arange(u_max + 1, dtype=float)
    n = u_max + s.min_terms(k) + 16
    while True:
        n = min(n, s.max_terms)
        l1 = np.arange(n, dtype=float)[:, None]
        logt = xlogy(l1, k * s_ratio) + gammaln(l1 + u + 1) - 2 * gammaln(l1 + 1)
        total = logsumexp(logt, axis=0)
        if k == 0 or np.all(logt[-1] - total <= math.log(s.rel_tol)):
            return total, n, True
        if n >= s.max_terms:
            return total, n, False
        n *= 2


def _relay_leg_log_sum(k, lam_sr, lam_li, xi, chi, s):
    """Relay-leg series without its exponential prefactor, in log space.

    Sums over (l1, l2, m1, u) of

        K**(l1+l2) C(m1,u) (u+l1)! chi**u lam_li**u xi**(m1-u)
        * lam_sr**(l1+u-m1+1) (lam_sr + lam_li chi)**-(l1+u+1)
        * (K+1)**(m1-u) / ((l1!)**2 l2! m1!)

    The l1 sum is done first for every u, then m1 and u exactly, and l2 is
    accumulated with an adaptive cutoff.
    """
    denom = lam_sr + lam_li * chi
    s_ratio = lam_sr / denom
    r_ratio = lam_li * chi / denom
    z = (k + 1) * xi / lam_sr
    n_min = s.min_terms(k)
    n2 = max(n_min, 16)
    while True:
        n2 = min(n2, s.max_terms)
        log_a, n1, ok1 = _log_l1_sums(k, s_ratio, n2 - 1, s)
        m1 = np.arange(n2, dtype=float)[:, None]
        u = np.arange(n2, dtype=float)[None, :]
        diff = np.where(u <= m1, m1 - u, 0.0)
        logd = (xlogy(u, r_ratio) + xlogy(diff, z) - gammaln(u + 1) - gammaln(diff + 1)
                + log_a[None, :])
        logd = np.where(u <= m1, logd, -np.inf)
        if s.term_fault:
            logd[0, 0] += math.log1p(s.term_fault)
        # inner double sum for m1 <= l2 is a running total over m1
        log_inner = np.logaddexp.accumulate(logsumexp(logd, axis=1))
        l2 = np.arange(n2, dtype=float)
        logt = xlogy(l2, k) - gammaln(l2 + 1) + log_inner
        total = logsumexp(logt)
        ok2 = k == 0 or logt[-1] - total <= math.log(s.rel_tol)
        if ok2 or n2 >= s.max_terms:
            return total + math.log(s_ratio), {"l1": n1, "l2": n2}, bool(ok1 and ok2)
        n2 *= 2


def _dest_leg_log_sum(k, lam, thr, s):
    """log of sum_l3 K**l3 / l3! sum_{m2<=l3} ((K+1) thr / lam)**m2 / m2!."""
    w = (k + 1) * thr / lam
    n = max(s.min_terms(k), 16)
    while True:
        n = min(n, s.max_terms)
        idx = np.arange(n, dtype=float)
        log_inner = np.logaddexp.accumulate(xlogy(idx, w) - gammaln(idx + 1))
        logt = xlogy(idx, k) - gammaln(idx + 1) + log_inner
        total = logsumexp(logt)
        ok = k == 0 or logt[-1] - total <= math.log(s.rel_tol)
        if ok or n >= s.max_terms:
            return total, n, bool(ok)
        n *= 2


def op_far_series(cfg: NetworkConfig, snr: SnrPoint, s: SeriesControl = DEFAULT_SERIES) -> OutageResult:
    """Far-user outage from the truncated closed-form series."""
    c = threshold_coefficients(cfg, snr)
    if math.isinf(c.xi) or math.isinf(c.psi):
        return _certain_outage("series")
    k = cfg.k_factor
    log_relay, used, ok_r = _relay_leg_log_sum(k, cfg.lambda_sr, cfg.lambda_li, c.xi, c.chi, s)
    log_dest, n3, ok_d = _dest_leg_log_sum(k, cfg.lambda_rdf, c.psi, s)
    log_expo = -(k + 1) * c.xi / cfg.lambda_sr - (k + 1) * c.psi / cfg.lambda_rdf - 3 * k
    success = math.exp(log_relay + log_dest + log_expo)
    used["l3"] = n3
    return OutageResult(_clamp(1 - success), "series", used, ok_r and ok_d)


def op_near_series(cfg: NetworkConfig, snr: SnrPoint, s: SeriesControl = DEFAULT_SERIES,
                   variant: str = DEFAULT_NEAR_VARIANT) -> OutageResult:
    """Near-user outage from the truncated closed-form series.

    ``variant`` selects the exponential factor, see ``NEAR_VARIANTS``.
    """
    arg_name, k_mult = NEAR_VARIANTS[variant]
    c = threshold_coefficients(cfg, snr)
    if math.isinf(c.xi) or math.isinf(c.phi):
        return _certain_outage("series")
    k = cfg.k_factor
    log_relay, used, ok_r = _relay_leg_log_sum(k, cfg.lambda_sr, cfg.lambda_li, c.xi, c.chi, s)
    log_dest, n6, ok_d = _dest_leg_log_sum(k, cfg.lambda_rdn, c.phi, s)
    arg = c.xi if arg_name == "xi" else c.chi
    log_expo = -(k + 1) * (arg / cfg.lambda_sr + c.phi / cfg.lambda_rdn) - k_mult * k
    success = math.exp(log_relay + log_dest + log_expo)
    used["l3"] = n6
    return OutageResult(_clamp(1 - success), "series", used, ok_r and ok_d)


# --------------------------------------------------------------------------
# quadrature form

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10


def relay_success_quadrature(cfg: NetworkConfig, xi, chi, s=DEFAULT_SERIES):
    """Pr(rho_SR > xi + chi * rho_LI) and the quadrature error estimate."""
    p_sr, p_li = cfg.link("sr"), cfg.link("li")
    if chi == 0:
        return rician_ccdf(xi, p_sr, s), 0.0

    def integrand(y):
        return rician_pdf(y, p_li, s) * rician_ccdf(chi * y + xi, p_sr, s)

    # split where the loop-interference density has effectively decayed
    k, lam = p_li.k_factor, p_li.mean_gain
    y_split = lam * (1 + 10 * math.sqrt(2 * k + 1) / (k + 1))
    head, err_h = integrate.quad(integrand, 0.0, y_split, epsabs=QUAD_EPSABS,
                                 epsrel=QUAD_EPSREL, limit=200)
    tail, err_t = integrate.quad(integrand, y_split, np.inf, epsabs=QUAD_EPSABS,
                                 epsrel=QUAD_EPSREL, limit=200)
    return head + tail, err_h + err_t


def _op_quadrature(cfg, snr, dest_link, dest_thr, s):
    c = threshold_coefficients(cfg, snr)
    thr = getattr(c, dest_thr)
    if math.isinf(c.xi) or math.isinf(thr):
        return _certain_outage("quadrature")
    relay, err = relay_success_quadrature(cfg, c.xi, c.chi, s)
    dest = rician_ccdf(thr, cfg.link(dest_link), s)
    ok = err <= 1e-8
    return OutageResult(_clamp(1 - dest * relay), "quadrature", {}, ok)


def op_far_quadrature(cfg: NetworkConfig, snr: SnrPoint, s: SeriesControl = DEFAULT_SERIES) -> OutageResult:
    return _op_quadrature(cfg, snr, "rdf", "psi", s)


def op_near_quadrature(cfg: NetworkConfig, snr: SnrPoint, s: SeriesControl = DEFAULT_SERIES) -> OutageResult:
    return _op_quadrature(cfg, snr, "rdn", "phi", s)


# --------------------------------------------------------------------------
# high-SNR approximations

def _asymptotic_relay_sum(cfg, c, s):
    k, lam_sr, lam_li = cfg.k_factor, cfg.lambda_sr, cfg.lambda_li
    total = 0.0
    n_min = s.min_terms(k)
    for l in range(s.max_terms):
        term = (math.exp(xlogy(l, k) - 2 * k - math.lgamma(l + 1)) / lam_sr
                * (lam_li * c.chi * (l + 1) + (k + 1) * c.xi))
        total += term
        if l + 1 >= n_min and term <= s.rel_tol * total:
            return total, l + 1, True
    return total, s.max_terms, False


def _op_asymptotic(cfg, snr, dest_link, dest_thr, s):
    c = threshold_coefficients(cfg, snr)
    thr = getattr(c, dest_thr)
    if math.isinf(c.xi) or math.isinf(thr):
        return _certain_outage("asymptotic")
    k = cfg.k_factor
    lam_dest = getattr(cfg, f"lambda_{dest_link}")
    relay_sum, n, ok = _asymptotic_relay_sum(cfg, c, s)
    # a linearized leg can exceed certainty at low SNR; cap it there so the
    # product of two negative "success" factors cannot pass for a good link
    dest = max(1 - math.exp(-k) * (k + 1) * thr / lam_dest, 0.0)
    value = 1 - dest * max(1 - relay_sum, 0.0)
    return OutageResult(_clamp(value), "asymptotic", {"l": n}, ok)


def op_far_asymptotic(cfg: NetworkConfig, snr: SnrPoint, s: SeriesControl = DEFAULT_SERIES) -> OutageResult:
    """First-order high-SNR far-user outage."""
    return _op_asymptotic(cfg, snr, "rdf", "psi", s)


def op_near_asymptotic(cfg: NetworkConfig, snr: SnrPoint, s: SeriesControl = DEFAULT_SERIES) -> OutageResult:
    """First-order high-SNR near-user outage."""
    return _op_asymptotic(cfg, snr, "rdn", "phi", s)


def diversity_order_estimate(op_curve) -> float:
    """Negated log-log slope of outage vs SNR over the two highest-SNR points."""
    pts = sorted((float(x), float(y)) for x, y in op_curve)
    if len(pts) < 2:
        raise ValueError("need at least two (snr, op) points")
    snrs = [x for x, _ in pts]
    if any(b <= a for a, b in zip(snrs, snrs[1:])) or snrs[0] <= 0:
        raise ValueError("SNR values must be positive and strictly increasing")
    (x1, y1), (x2, y2) = pts[-2], pts[-1]
    if y1 <= 0 or y2 <= 0:
        raise ValueError("outage probability of 0 makes the slope undefined")
    if y1 > 1 or y2 > 1:
        raise ValueError("outage probabilities must lie in (0, 1]")
    return -(math.log(y2) - math.log(y1)) / (math.log(x2) - math.log(x1))


# --------------------------------------------------------------------------
# ergodic rates

def mean_gain_series(k: float, lam: float, s: SeriesControl = DEFAULT_SERIES) -> float:
    """lam * exp(-K) * sum_l (l + 1) K**l / ((K + 1) l!), which equals lam."""
    total = 0.0
    n_min = s.min_terms(k)
    for l in range(s.max_terms):
        term = (l + 1) * math.exp(xlogy(l, k) - k - math.lgamma(l + 1)) / (k + 1)
        total += term
        if l + 1 >= n_min and term <= s.rel_tol * total:
            return lam * total
    raise ArithmeticError(f"mean-gain series not converged after {s.max_terms} terms")


def _hd_factor(cfg, hd_prelog_half):
    return 0.5 if (hd_prelog_half and cfg.duplex is Duplex.HD) else 1.0


def er_far_high_snr(cfg: NetworkConfig, s: SeriesControl = DEFAULT_SERIES, *,
                    hd_prelog_half: bool = True) -> float:
    psi_sr = mean_gain_series(cfg.k_factor, cfg.lambda_sr, s)
    psi_li = mean_gain_series(cfg.k_factor, cfg.lambda_li, s)
    ksr2 = cfg.kappa_sr ** 2
    dest = _ratio(cfg.b1, cfg.b2 + cfg.kappa_rdf ** 2)
    relay = _ratio(cfg.a1 * psi_sr,
                   (cfg.a2 + ksr2) * psi_sr + psi_li * cfg.varpi ** 2 * (1 + ksr2))
    return _hd_factor(cfg, hd_prelog_half) * math.log2(1 + min(dest, relay))


def er_near_high_snr(cfg: NetworkConfig, s: SeriesControl = DEFAULT_SERIES, *,
                     hd_prelog_half: bool = True) -> float:
    """High-SNR near-user rate; the leading 1/2 is the channel-ordering factor.

    Returns ``inf`` with a DegenerateRateWarning when both arguments of the
    minimum diverge (ideal hardware, perfect SIC and no loop interference).
    """
    psi_sr = mean_gain_series(cfg.k_factor, cfg.lambda_sr, s)
    psi_li = mean_gain_series(cfg.k_factor, cfg.lambda_li, s)
    ksr2 = cfg.kappa_sr ** 2
    dest = _ratio(cfg.b2, cfg.kappa_rdn ** 2 + cfg.epsilon * cfg.b1)
    relay = _ratio(cfg.a2 * psi_sr,
                   psi_sr * (ksr2 + cfg.epsilon * cfg.a1) + psi_li * cfg.varpi ** 2 * (1 + ksr2))
    arg = min(dest, relay)
    if math.isinf(arg):
        warnings.warn("near-user high-SNR rate is unbounded for this configuration",
                      DegenerateRateWarning, stacklevel=2)
        return INF
    return _hd_factor(cfg, hd_prelog_half) * 0.5 * math.log2(1 + arg)


def esr_high_snr(cfg: NetworkConfig, s: SeriesControl = DEFAULT_SERIES, *,
                 hd_prelog_half: bool = True) -> float:
    return (er_far_high_snr(cfg, s, hd_prelog_half=hd_prelog_half)
            + er_near_high_snr(cfg, s, hd_prelog_half=hd_prelog_half))
