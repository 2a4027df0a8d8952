"""Monte Carlo estimates of outage probabilities and ergodic rates.

Trials are cut into fixed-size blocks. Block ``i`` draws from a Philox
stream keyed by ``(seed, i)``, and block results are reduced in block order,
so an estimate depends only on ``(seed, trials)`` and never on how many
workers evaluated the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ParameterError, sample_gain
from .system_model import (Duplex, LinkGains, NetworkConfig, SnrPoint,
                           sinr_far_user, sinr_near_user_far_signal,
                           sinr_near_user_own, sinr_relay_far, sinr_relay_near)

BLOCK_SIZE = 1 << 16
IPSIC_MODES = ("deterministic", "exponential")


@dataclass(frozen=True)
class McSettings:
    trials: int = 1_000_000
    seed: int = 20200101
    ipsic_mode: str = "deterministic"
    hd_prelog_half: bool = True
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ParameterError(f"trials must be a positive integer, got {self.trials}")
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        if self.ipsic_mode not in IPSIC_MODES:
            raise ParameterError(f"ipsic_mode must be one of {IPSIC_MODES}")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    trials: int


def block_rng(seed, block):
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def sample_link_gains(cfg: NetworkConfig, rng, size=None, ipsic_mode="deterministic") -> LinkGains:
    """Independent draws of all four links plus the ipSIC residual powers.

    The residuals are drawn after the gains, so with ``epsilon = 0`` both
    ipSIC modes see exactly the same channel gains.
    """
    rho_sr = sample_gain(cfg.link("sr"), rng, size)
    rho_li = sample_gain(cfg.link("li"), rng, size)
    rho_rdf = sample_gain(cfg.link("rdf"), rng, size)
    rho_rdn = sample_gain(cfg.link("rdn"), rng, size)
    eps = cfg.epsilon
    if ipsic_mode == "deterministic":
        g_sr, g_rdn = eps * rho_sr, eps * rho_rdn
    elif ipsic_mode == "exponential":
        # |w|**2 for w ~ CN(0, eps * rho)
        def residual(rho):
            re, im = rng.standard_normal(size), rng.standard_normal(size)
            return eps * rho * (re * re + im * im) / 2

        g_sr, g_rdn = residual(rho_sr), residual(rho_rdn)
    else:
        raise ParameterError(f"unknown ipsic_mode {ipsic_mode!r}")
    return LinkGains(rho_sr, rho_li, rho_rdf, rho_rdn, g_sr, g_rdn)


def _blocks(trials):
    n_full, rest = divmod(trials, BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * n_full
    if rest:
        sizes.append(rest)
    return sizes


def _run_blocks(fn, mc):
    sizes = _blocks(mc.trials)
    jobs = list(enumerate(sizes))
    if mc.workers == 1 or len(jobs) == 1:
        return [fn(i, n) for i, n in jobs]
    with ThreadPoolExecutor(max_workers=mc.workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _binomial(count, n):
    p = count / n
    return McEstimate(p, math.sqrt(p * (1 - p) / n), n)


def binomial_z(est: McEstimate, reference: float) -> float:
    """|estimate - reference| in units of the binomial SE at ``reference``.

    The SE is taken under the reference probability, so estimates that saw
    zero or all-outage trials are still scored sensibly.
    """
    gap = abs(est.value - reference)
    se = math.sqrt(reference * (1 - reference) / est.trials)
    if se == 0:
        return 0.0 if gap == 0 else math.inf
    return gap / se


def _sample_mean(total, total_sq, n):
    mean = total / n
    if n < 2:
        return McEstimate(mean, 0.0, n)
    var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    return McEstimate(mean, math.sqrt(var / n), n)


def outage_events(cfg: NetworkConfig, gains: LinkGains, snr: SnrPoint):
    """Boolean outage indicators (far, near) for each draw in ``gains``."""
    relay_ok = ((sinr_relay_far(cfg, gains, snr) >= cfg.gamma_thf)
                & (sinr_relay_near(cfg, gains, snr) >= cfg.gamma_thn))
    far_ok = relay_ok & (sinr_far_user(cfg, gains, snr) >= cfg.gamma_thf)
    near_ok = (relay_ok
               & (sinr_near_user_far_signal(cfg, gains, snr) >= cfg.gamma_thf)
               & (sinr_near_user_own(cfg, gains, snr) >= cfg.gamma_thn))
    return ~far_ok, ~near_ok


def mc_outage(cfg: NetworkConfig, snr: SnrPoint, mc: McSettings = McSettings()):
    """Outage frequencies (far, near) with binomial standard errors."""

    def block(i, n):
        gains = sample_link_gains(cfg, block_rng(mc.seed, i), n, mc.ipsic_mode)
        far, near = outage_events(cfg, gains, snr)
        return int(far.sum()), int(near.sum())

    counts = _run_blocks(block, mc)
    far = sum(c[0] for c in counts)
    near = sum(c[1] for c in counts)
    return _binomial(far, mc.trials), _binomial(near, mc.trials)


def instantaneous_rates(cfg: NetworkConfig, gains: LinkGains, snr: SnrPoint, hd_prelog_half=True):
    """Per-draw achievable rates (far, near) in bit/s/Hz.

    The near user's rate is zero whenever its gain to the relay is below the
    far user's.
    """
    r_far = np.log2(1 + np.minimum(sinr_relay_far(cfg, gains, snr), sinr_far_user(cfg, gains, snr)))
    r_near = np.log2(1 + np.minimum(sinr_relay_near(cfg, gains, snr),
                                    sinr_near_user_own(cfg, gains, snr)))
    r_near = np.where(np.asarray(gains.rho_rdn) < np.asarray(gains.rho_rdf), 0.0, r_near)
    if hd_prelog_half and cfg.duplex is Duplex.HD:
        r_far, r_near = 0.5 * r_far, 0.5 * r_near
    return r_far, r_near


def mc_ergodic_rates(cfg: NetworkConfig, snr: SnrPoint, mc: McSettings = McSettings()):
    """Sample-mean ergodic rates (far, near, sum)."""

    def block(i, n):
        gains = sample_link_gains(cfg, block_rng(mc.seed, i), n, mc.ipsic_mode)
        rf, rn = instantaneous_rates(cfg, gains, snr, mc.hd_prelog_half)
        rs = rf + rn
        return (float(rf.sum()), float((rf * rf).sum()), float(rn.sum()), float((rn * rn).sum()),
                float(rs.sum()), float((rs * rs).sum()))

    parts = _run_blocks(block, mc)
    tot = [sum(p[j] for p in parts) for j in range(6)]
    n = mc.trials
    return (_sample_mean(tot[0], tot[1], n), _sample_mean(tot[2], tot[3], n),
            _sample_mean(tot[4], tot[5], n))


def mc_ordering_probability(cfg: NetworkConfig, mc: McSettings = McSettings()) -> McEstimate:
    """Empirical Pr(rho_RDn >= rho_RDf), the event that gives D_n a nonzero rate."""

    def block(i, n):
        gains = sample_link_gains(cfg, block_rng(mc.seed, i), n, mc.ipsic_mode)
        return int((np.asarray(gains.rho_rdn) >= np.asarray(gains.rho_rdf)).sum())

    return _binomial(sum(_run_blocks(block, mc)), mc.trials)
