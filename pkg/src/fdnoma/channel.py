"""Rician fading statistics for channel power gains.

A link is described by its K-factor and the mean of the power gain
``rho = |h|**2``. With ``K = 0`` every function here reduces to the
exponential (Rayleigh-power) law of the same mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln, logsumexp, xlogy


class ParameterError(ValueError):
    """Raised when a parameter lies outside its admissible domain."""


class SeriesConvergenceError(ArithmeticError):
    """An infinite sum did not meet its tolerance within ``max_terms``.

    The partial value and the number of terms consumed are kept on the
    exception so callers can decide whether the estimate is still usable.
    """

    def __init__(self, message, partial, terms):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


@dataclass(frozen=True)
class RicianParams:
    k_factor: float
    mean_gain: float

    def __post_init__(self):
        if not (math.isfinite(self.k_factor) and self.k_factor >= 0):
            raise ParameterError(f"k_factor must be >= 0, got {self.k_factor}")
        if not (math.isfinite(self.mean_gain) and self.mean_gain > 0):
            raise ParameterError(f"mean_gain must be > 0, got {self.mean_gain}")


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every infinite sum in the package.

    A sum stops once its newest term is below ``rel_tol`` times the running
    total and at least ``ceil(K) + 5`` terms were taken. ``term_fault`` is a
    fault-injection hook used by the validation tests: it perturbs the
    leading term of the relay-leg outage series by that relative amount.
    """

    max_terms: int = 2000
    rel_tol: float = 1e-12
    term_fault: float = 0.0

    def __post_init__(self):
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ParameterError(f"max_terms must be a positive integer, got {self.max_terms}")
        if not 0 < self.rel_tol < 1:
            raise ParameterError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")

    def min_terms(self, k_factor):
        return math.ceil(k_factor) + 5

    def refined(self):
        """Twice the terms and a tenth of the tolerance, for self-checks."""
        return SeriesControl(2 * self.max_terms, self.rel_tol / 10, self.term_fault)


DEFAULT_SERIES = SeriesControl()


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ParameterError("gain arguments must be nonnegative")
    return arr


def _log_bessel_i0(z, s):
    """log I0(2*sqrt(z)) from its power series sum_l z**l / (l!)**2."""
    zmax = float(np.max(z)) if z.size else 0.0
    n = max(32, int(2 * math.sqrt(zmax)) + 32)
    while True:
        if n > s.max_terms:
            n = s.max_terms
        l = np.arange(n, dtype=float)
        logt = xlogy(l[:, None], z[None, :]) - 2.0 * gammaln(l + 1.0)[:, None]
        total = logsumexp(logt, axis=0)
        tail_ok = np.all(logt[-1] - total <= math.log(s.rel_tol))
        if tail_ok:
            return total
        if n >= s.max_terms:
            raise SeriesConvergenceError(
                "Bessel I0 series did not converge", np.exp(total), n)
        n *= 2


def rician_pdf(x, p, s=DEFAULT_SERIES):
    """Density of the Rician power gain.

    I0 is evaluated through its power series in log space, which is the
    same expansion as the term-wise Poisson mixture form of the density.
    """
    x = _as_array(x)
    k, lam = p.k_factor, p.mean_gain
    flat = x.ravel()
    log_pref = math.log((k + 1) / lam) - k - (k + 1) * flat / lam
    log_i0 = _log_bessel_i0(k * (k + 1) * flat / lam, s)
    out = np.exp(log_pref + log_i0).reshape(x.shape)
    return out if out.ndim else float(out)


def _poisson_gamma_sum(x, p, s, gamma_fn):
    x = _as_array(x)
    k, lam = p.k_factor, p.mean_gain
    z = (k + 1) * x.ravel() / lam
    total = np.zeros_like(z)
    n_min = s.min_terms(k)
    for l in range(s.max_terms):
        weight = math.exp(-k + xlogy(l, k) - math.lgamma(l + 1))
        term = weight * gamma_fn(l + 1, z)
        total += term
        if l + 1 >= n_min and np.all(term <= s.rel_tol * total):
            break
        if k == 0:
            break
    else:
        raise SeriesConvergenceError(
            "Rician CDF series did not converge", total.reshape(x.shape), s.max_terms)
    out = np.clip(total, 0.0, 1.0).reshape(x.shape)
    return out if out.ndim else float(out)


def rician_cdf(x, p, s=DEFAULT_SERIES):
    """F(x) = exp(-K) sum_l K**l / l! * P(l + 1, (K + 1) x / mean)."""
    return _poisson_gamma_sum(x, p, s, gammainc)


def rician_ccdf(x, p, s=DEFAULT_SERIES):
    """Survival function, summed from the upper incomplete gamma directly."""
    return _poisson_gamma_sum(x, p, s, gammaincc)


def sample_gain(p, rng, size=None):
    """Draw ``|nu + w|**2`` with a fixed LOS amplitude and complex Gaussian scatter."""
    k, lam = p.k_factor, p.mean_gain
    los = math.sqrt(k * lam / (k + 1))
    sigma = math.sqrt(lam / (2 * (k + 1)))
    re = los + sigma * rng.standard_normal(size)
    im = sigma * rng.standard_normal(size)
    return re * re + im * im
