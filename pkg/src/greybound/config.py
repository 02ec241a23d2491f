"""Run configuration for the command-line front-end.

Values are layered: built-in defaults, then a named figure preset, then a
flat ``key=value`` config file, then explicit command-line flags.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DomainError
from .spacetime import MIN_OMEGA, BlackHole

FAMILIES = ("schwarzschild", "reissner-nordstrom")
INJECT_MODES = ("none", "zero")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    family: str = "reissner-nordstrom"
    g: float = 1.0
    m: float = 2.0
    q: float = 1.0
    l: int = 1
    omega: str = "0.1:2.0:50"
    r_grid: Optional[str] = None
    out: Optional[str] = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    eps_horizon: Optional[float] = None
    r_far: Optional[float] = None
    workers: int = 1
    # verification self-test hooks
    inject: str = "none"
    bound_offset: float = 0.0

    def black_hole(self) -> BlackHole:
        return BlackHole(mass=self.m, charge=self.q, newton_g=self.g)

    def omegas(self) -> np.ndarray:
        return parse_omega(self.omega)

    def header(self, command: str) -> str:
        """Effective configuration as a single ``#`` comment line."""
        parts = [f"command={command}"]
        for f in fields(self):
            value = getattr(self, f.name)
            parts.append(f"{f.name}={'' if value is None else value}")
        return "# " + " ".join(parts)


PRESETS: dict[str, dict] = {
    # uncharged potential, l = 1, GM = 2
    "fig1": dict(family="schwarzschild", g=1.0, m=2.0, q=0.0, l=1),
    # charged potential against the equal-mass uncharged one
    "fig2": dict(family="reissner-nordstrom", g=1.0, m=2.0, q=1.0, l=1),
    # transmission and reflection bound comparisons
    "fig3": dict(family="reissner-nordstrom", g=1.0, m=2.0, q=1.0, l=1, omega="0.1:2.0:50"),
    "fig4": dict(family="reissner-nordstrom", g=1.0, m=2.0, q=1.0, l=1, omega="0.1:2.0:50"),
}

_CASTS = {
    "family": str, "g": float, "m": float, "q": float, "l": int, "omega": str,
    "r_grid": str, "out": str, "rel_tol": float, "abs_tol": float,
    "eps_horizon": float, "r_far": float, "workers": int, "inject": str,
    "bound_offset": float,
}


def parse_triplet(text: str, what: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{what} must look like start:stop:count, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"cannot parse {what} {text!r}: {exc}") from None
    return lo, hi, n


def parse_omega(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        lo, hi, n = parse_triplet(text, "omega grid")
        if n < 1:
            raise ConfigError("omega grid needs count >= 1")
        values = np.linspace(lo, hi, n)
    else:
        try:
            values = np.array([float(v) for v in text.split(",") if v.strip()])
        except ValueError as exc:
            raise ConfigError(f"cannot parse omega list {text!r}: {exc}") from None
    if values.size == 0:
        raise ConfigError("omega grid is empty")
    if not np.all(values >= MIN_OMEGA) or not np.all(np.isfinite(values)):
        raise ConfigError(f"every omega must be finite and >= {MIN_OMEGA}")
    if np.any(np.diff(values) < 0):
        raise ConfigError("omega grid must be ascending")
    return values


def read_config_file(path: str | Path) -> dict:
    """Parse flat ``key=value`` lines; blank lines and ``#`` comments skipped."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key != "preset" and key not in _CASTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _cast(values: dict) -> dict:
    out = {}
    for key, value in values.items():
        if value is None:
            continue
        try:
            out[key] = _CASTS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    return out


def build_config(preset: Optional[str] = None, file_values: Optional[dict] = None,
                 flag_values: Optional[dict] = None) -> RunConfig:
    file_values = dict(file_values or {})
    flag_values = {k: v for k, v in (flag_values or {}).items() if v is not None}
    preset = preset or file_values.pop("preset", None)
    file_values.pop("preset", None)
    cfg = RunConfig()
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        cfg = replace(cfg, **PRESETS[preset])
    cfg = replace(cfg, **_cast(file_values))
    cfg = replace(cfg, **_cast(flag_values))
    return cfg


def validate(cfg: RunConfig, command: str) -> RunConfig:
    """Check a configuration against the library preconditions.

    Raises :class:`ConfigError` before any computation starts.
    """
    if cfg.family not in FAMILIES:
        raise ConfigError(f"family must be one of {FAMILIES}, got {cfg.family!r}")
    if cfg.family == "schwarzschild" and cfg.q != 0:
        raise ConfigError("family=schwarzschild requires q=0")
    if cfg.l < 0:
        raise ConfigError("l must be non-negative")
    if not (cfg.rel_tol > 0 and cfg.abs_tol > 0):
        raise ConfigError("tolerances must be positive")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    if cfg.inject not in INJECT_MODES:
        raise ConfigError(f"inject must be one of {INJECT_MODES}")
    try:
        bh = cfg.black_hole()
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    if command in ("potential", "bounds", "verify") and not bh.is_sub_extremal:
        raise ConfigError(f"{command} needs a sub-extremal hole (G M^2 > Q^2); "
                          f"got {bh.extremality.value}")
    if command in ("bounds", "verify"):
        cfg.omegas()
    if cfg.r_grid is not None:
        lo, hi, n = parse_triplet(cfg.r_grid, "r grid")
        if n < 2:
            raise ConfigError("r grid needs count >= 2")
        if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo < hi):
            raise ConfigError("r grid needs 0 < min < max")
    if cfg.eps_horizon is not None and not cfg.eps_horizon > 0:
        raise ConfigError("eps_horizon must be positive")
    if cfg.r_far is not None and not cfg.r_far > 0:
        raise ConfigError("r_far must be positive")
    return cfg
