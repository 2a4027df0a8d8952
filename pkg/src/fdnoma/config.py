"""Flat ``key = value`` run configuration.

Every key is optional; missing keys take the reference values below. Lists
are comma separated and threshold pairs are written ``far:near``::

    # reference scenario, FD only
    modes = FD
    k_factors = 0, 1
    threshold_pairs = 1:3, 0.5:1.5
    trials = 200000
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from typing import NamedTuple

from .analytics import DEFAULT_NEAR_VARIANT, NEAR_VARIANTS
from .channel import ParameterError, SeriesControl
from .montecarlo import McSettings
from .system_model import ConfigError, Duplex, NetworkConfig


@dataclass(frozen=True)
class SweepSpec:
    snr_db_start: float = 0.0
    snr_db_stop: float = 50.0
    snr_db_step: float = 5.0
    modes: tuple = (Duplex.HD, Duplex.FD)
    k_factors: tuple = (0.0, 1.0)
    threshold_pairs: tuple = ((1.0, 3.0), (0.5, 1.5))
    relay_offset_db: float = 0.0
    surface_max: float = 0.3
    surface_step: float = 0.05
    surface_snr_db: float = 10.0
    er_k_factor: float = 1.0
    near_variant: str = DEFAULT_NEAR_VARIANT

    def __post_init__(self):
        problems = []
        if not self.snr_db_step > 0:
            problems.append("snr_db_step > 0 violated")
        if not self.snr_db_start <= self.snr_db_stop:
            problems.append("snr_db_start <= snr_db_stop violated")
        if not (self.modes and self.k_factors and self.threshold_pairs):
            problems.append("nonempty modes/k_factors/threshold_pairs violated")
        if any(k < 0 for k in self.k_factors) or self.er_k_factor < 0:
            problems.append("k_factors >= 0 violated")
        if any(len(p) != 2 or min(p) <= 0 for p in self.threshold_pairs):
            problems.append("threshold pairs positive violated")
        if not (self.surface_step > 0 and 0 <= self.surface_max < 1):
            problems.append("surface grid (step > 0, 0 <= max < 1) violated")
        if self.near_variant not in NEAR_VARIANTS:
            problems.append(f"near_variant in {sorted(NEAR_VARIANTS)} violated")
        if problems:
            raise ConfigError("; ".join(problems))

    def snr_grid(self):
        n = int(math.floor((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9))
        return [self.snr_db_start + i * self.snr_db_step for i in range(n + 1)]

    def surface_grid(self):
        n = int(math.floor(self.surface_max / self.surface_step + 1e-9))
        return [round(i * self.surface_step, 12) for i in range(n + 1)]


class RunConfig(NamedTuple):
    network: NetworkConfig
    sweep: SweepSpec
    mc: McSettings
    series: SeriesControl


_SECTIONS = {
    "network": NetworkConfig,
    "sweep": SweepSpec,
    "mc": McSettings,
    "series": SeriesControl,
}
_HIDDEN = {"term_fault"}


def _key_owner():
    owner = {}
    for section, cls in _SECTIONS.items():
        for f in fields(cls):
            if f.name not in _HIDDEN:
                owner[f.name] = (section, f)
    return owner


def _parse_bool(text):
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _split(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_value(name, text):
    if name == "duplex":
        return Duplex(text.upper())
    if name == "modes":
        return tuple(Duplex(t.upper()) for t in _split(text))
    if name == "k_factors":
        return tuple(float(t) for t in _split(text))
    if name == "threshold_pairs":
        pairs = []
        for t in _split(text):
            far, near = t.split(":")
            pairs.append((float(far), float(near)))
        return tuple(pairs)
    if name in ("ipsic_mode", "near_variant"):
        return text
    if name == "hd_prelog_half":
        return _parse_bool(text)
    if name in ("trials", "seed", "workers", "max_terms"):
        return int(text)
    return float(text)


def _format_value(value):
    if isinstance(value, Duplex):
        return value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{a!r}:{b!r}" for a, b in value)
        return ", ".join(_format_value(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def parse_config_text(text: str) -> RunConfig:
    owner = _key_owner()
    values = {section: {} for section in _SECTIONS}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in owner:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        section, _ = owner[key]
        try:
            values[section][key] = _parse_value(key, val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    try:
        return RunConfig(**{section: cls(**values[section]) for section, cls in _SECTIONS.items()})
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(path) -> RunConfig:
    """Read a config file; ``None`` gives the reference defaults."""
    if path is None:
        return parse_config_text("")
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def format_config(run: RunConfig) -> str:
    lines = []
    for section, record in zip(_SECTIONS, run):
        lines.append(f"# {section}")
        for f in fields(record):
            if f.name in _HIDDEN:
                continue
            lines.append(f"{f.name} = {_format_value(getattr(record, f.name))}")
    return "\n".join(lines) + "\n"


def with_overrides(run: RunConfig, *, trials=None, seed=None, workers=None) -> RunConfig:
    changes = {k: v for k, v in (("trials", trials), ("seed", seed), ("workers", workers))
               if v is not None}
    if not changes:
        return run
    try:
        return run._replace(mc=dataclasses.replace(run.mc, **changes))
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
