"""Network configuration and instantaneous SINRs of the FD relay NOMA link.

Source S superposes the far-user signal x1 (power share a1) and the
near-user signal x2 (a2) towards a decode-and-forward relay R, which
re-encodes them with shares b1/b2 towards D_f and D_n. In full duplex the
relay hears its own transmission through the loop channel h_LI.

All SINR functions accept scalars or numpy arrays in ``LinkGains`` and
broadcast elementwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields

import numpy as np

from .channel import ParameterError, RicianParams


class ConfigError(ParameterError):
    """A NetworkConfig (or sweep/settings record) violates its invariants."""


class Duplex(enum.Enum):
    HD = "HD"
    FD = "FD"

    @property
    def varpi(self):
        return 1.0 if self is Duplex.FD else 0.0


@dataclass(frozen=True)
class NetworkConfig:
    a1: float = 0.7
    a2: float = 0.3
    b1: float = 0.7
    b2: float = 0.3
    kappa_sr: float = 0.05
    kappa_li: float = 0.05
    kappa_rdf: float = 0.05
    kappa_rdn: float = 0.05
    epsilon: float = 0.01
    duplex: Duplex = Duplex.FD
    lambda_sr: float = 8.0
    lambda_li: float = 0.5
    lambda_rdf: float = 8.0
    lambda_rdn: float = 1.0
    k_factor: float = 1.0
    n0: float = 1.0
    gamma_thf: float = 1.0
    gamma_thn: float = 3.0

    def __post_init__(self):
        if isinstance(self.duplex, str):
            object.__setattr__(self, "duplex", Duplex(self.duplex.upper()))
        problems = self.violations()
        if problems:
            raise ConfigError("; ".join(problems))

    def violations(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name != "duplex" and not math.isfinite(v):
                out.append(f"{f.name} finite violated")
        if out:
            return out
        if not math.isclose(self.a1 + self.a2, 1.0, abs_tol=1e-9):
            out.append("a1 + a2 = 1 violated")
        if not self.a1 > self.a2:
            out.append("a1 > a2 violated")
        if not math.isclose(self.b1 + self.b2, 1.0, abs_tol=1e-9):
            out.append("b1 + b2 = 1 violated")
        if not self.b1 > self.b2:
            out.append("b1 > b2 violated")
        for name in ("a1", "a2", "b1", "b2"):
            if not 0 <= getattr(self, name) <= 1:
                out.append(f"0 <= {name} <= 1 violated")
        if not 0 <= self.epsilon < 1:
            out.append("0 <= epsilon < 1 violated")
        for name in ("kappa_sr", "kappa_li", "kappa_rdf", "kappa_rdn"):
            if getattr(self, name) < 0:
                out.append(f"{name} >= 0 violated")
        for name in ("lambda_sr", "lambda_li", "lambda_rdf", "lambda_rdn", "n0",
                     "gamma_thf", "gamma_thn"):
            if not getattr(self, name) > 0:
                out.append(f"{name} > 0 violated")
        if self.k_factor < 0:
            out.append("k_factor >= 0 violated")
        return out

    @property
    def varpi(self):
        return self.duplex.varpi

    def link(self, name):
        """RicianParams of one link: 'sr', 'li', 'rdf' or 'rdn'."""
        return RicianParams(self.k_factor, getattr(self, f"lambda_{name}"))


@dataclass(frozen=True)
class SnrPoint:
    gamma: float
    gamma_prime: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.gamma_prime > 0):
            raise ParameterError("transmit SNRs must be positive")

    @classmethod
    def from_db(cls, snr_db, relay_offset_db=0.0):
        g = 10.0 ** (snr_db / 10.0)
        return cls(g, g * 10.0 ** (relay_offset_db / 10.0))


@dataclass(frozen=True)
class LinkGains:
    """One joint draw of the four power gains plus ipSIC residual powers.

    Fields may be numpy arrays holding many independent draws.
    """

    rho_sr: float | np.ndarray
    rho_li: float | np.ndarray
    rho_rdf: float | np.ndarray
    rho_rdn: float | np.ndarray
    g_sr: float | np.ndarray = 0.0
    g_rdn: float | np.ndarray = 0.0


def _lsi(cfg, gains, snr):
    # loop self-interference plus its distortion; vanishes in HD
    return gains.rho_li * cfg.varpi ** 2 * snr.gamma_prime * (1 + cfg.kappa_sr ** 2)


def sinr_relay_far(cfg, gains, snr):
    """SINR of x1 at the relay (x2 treated as interference)."""
    rho, g = gains.rho_sr, snr.gamma
    k2 = cfg.kappa_sr ** 2
    return cfg.a1 * rho * g / ((cfg.a2 + k2) * rho * g + _lsi(cfg, gains, snr) + 1)


def sinr_relay_near(cfg, gains, snr):
    """SINR of x2 at the relay after cancelling x1 with residual ``g_sr``."""
    rho, g = gains.rho_sr, snr.gamma
    k2 = cfg.kappa_sr ** 2
    return cfg.a2 * rho * g / (rho * k2 * g + _lsi(cfg, gains, snr) + cfg.a1 * gains.g_sr * g + 1)


def sinr_far_user(cfg, gains, snr):
    rho, g = gains.rho_rdf, snr.gamma_prime
    return cfg.b1 * rho * g / (cfg.b2 * rho * g + rho * cfg.kappa_rdf ** 2 * g + 1)


def sinr_near_user_own(cfg, gains, snr):
    rho, g = gains.rho_rdn, snr.gamma_prime
    return cfg.b2 * rho * g / (rho * cfg.kappa_rdn ** 2 * g + cfg.b1 * gains.g_rdn * g + 1)


def sinr_near_user_far_signal(cfg, gains, snr):
    rho, g = gains.rho_rdn, snr.gamma_prime
    return cfg.b1 * rho * g / (cfg.b2 * rho * g + rho * cfg.kappa_rdn ** 2 * g + 1)
