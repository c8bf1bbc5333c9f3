"""Experiment configuration: a flat ``key = value`` file under ``[experiment]``.

Numeric fields accept plain numbers and rational multiples of pi such as
``pi/4.4``, ``2*pi/3``, ``-pi`` or ``1/3``.
"""

from __future__ import annotations

import configparser
import math
import os
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .geometry import AtomEnsemble

SECTION = "experiment"

_NUM = r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"
_FACTOR = rf"(?:{_NUM}|pi)"
_EXPR = re.compile(rf"^\s*([-+]?)\s*({_FACTOR}(?:\s*\*\s*{_FACTOR})*)\s*(?:/\s*({_FACTOR}(?:\s*\*\s*{_FACTOR})*))?\s*$")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _product(term: str) -> float:
    out = 1.0
    for f in term.split("*"):
        f = f.strip()
        out *= math.pi if f == "pi" else float(f)
    return out


def parse_number(text) -> float:
    """Parse ``'pi/4.4'``-style literals (and plain floats) to a float."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip().lower()
    try:
        return float(s)
    except ValueError:
        pass
    m = _EXPR.match(s)
    if not m:
        raise ValueError(f"cannot parse number {text!r}")
    sign, num, den = m.groups()
    val = _product(num) / (_product(den) if den else 1.0)
    return -val if sign == "-" else val


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"cannot parse boolean {text!r}")


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int
    endpoint: bool

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count, endpoint=self.endpoint)


@dataclass(frozen=True)
class ExperimentConfig:
    n_atoms: int = 3
    r1_x_lambda: float = 0.0
    r1_y_lambda: float = 0.0
    r2_x_lambda: float = 1.0 / 3.0
    r2_y_lambda: float = 0.0
    r3_x_lambda: float = 4.0
    r3_y_lambda: float = 0.0
    dipole_angle_rad: float = 0.0
    gamma_per_s: float = 1.0
    paper_mode: bool = True
    phi1_rad: float = 2.0 * math.pi / 3.0
    phi2_rad: float = math.pi / 4.4
    phi3_start_rad: float = 0.0
    phi3_stop_rad: float = 2.0 * math.pi
    phi3_count: int = 360
    phi3_endpoint: bool = False
    t3_start_inv_gamma: float = 0.0
    t3_stop_inv_gamma: float = 5.0
    t3_count: int = 201
    t3_endpoint: bool = True
    fit_window_start_inv_gamma: float = 0.0
    fit_window_stop_inv_gamma: float = 0.5
    fit_samples: int = 51
    out_dir: str = "out"
    workers: int = 0          # 0 means all available cores

    def __post_init__(self):
        validate(self)

    @property
    def phi3_grid(self) -> Grid:
        return Grid(self.phi3_start_rad, self.phi3_stop_rad, self.phi3_count, self.phi3_endpoint)

    @property
    def t3_grid(self) -> Grid:
        return Grid(self.t3_start_inv_gamma, self.t3_stop_inv_gamma, self.t3_count, self.t3_endpoint)

    @property
    def fit_window(self) -> tuple[float, float]:
        return (self.fit_window_start_inv_gamma, self.fit_window_stop_inv_gamma)

    def ensemble(self) -> AtomEnsemble:
        pos = [(self.r1_x_lambda, self.r1_y_lambda), (self.r2_x_lambda, self.r2_y_lambda),
               (self.r3_x_lambda, self.r3_y_lambda)][: self.n_atoms]
        return AtomEnsemble.from_dipole_angle(pos, self.dipole_angle_rad, self.gamma_per_s)

    def resolved_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


_INT = {"n_atoms", "phi3_count", "t3_count", "fit_samples", "workers"}
_BOOL = {"paper_mode", "phi3_endpoint", "t3_endpoint"}
_STR = {"out_dir"}


def _grid_ok(prefix, unit, start, stop, count):
    if count < 1:
        raise ConfigError(f"{prefix}_count", "grid must be non-empty")
    if count > 1 and not stop > start:
        raise ConfigError(f"{prefix}_stop_{unit}", "grid must be strictly increasing")


def validate(cfg: ExperimentConfig) -> None:
    if cfg.n_atoms not in (1, 2, 3):
        raise ConfigError("n_atoms", "must be 1, 2 or 3")
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name not in _INT | _BOOL | _STR and not math.isfinite(v):
            raise ConfigError(f.name, "must be finite")
    if not cfg.gamma_per_s > 0:
        raise ConfigError("gamma_per_s", "must be positive")
    _grid_ok("phi3", "rad", cfg.phi3_start_rad, cfg.phi3_stop_rad, cfg.phi3_count)
    _grid_ok("t3", "inv_gamma", cfg.t3_start_inv_gamma, cfg.t3_stop_inv_gamma, cfg.t3_count)
    if cfg.t3_start_inv_gamma < 0:
        raise ConfigError("t3_start_inv_gamma", "must be non-negative")
    if cfg.fit_samples < 3:
        raise ConfigError("fit_samples", "need at least 3 samples")
    if not cfg.fit_window_stop_inv_gamma > cfg.fit_window_start_inv_gamma >= 0:
        raise ConfigError("fit_window_stop_inv_gamma", "window must be non-empty and start at t >= 0")
    if cfg.workers < 0:
        raise ConfigError("workers", "must be >= 0")
    pos = [(cfg.r1_x_lambda, cfg.r1_y_lambda), (cfg.r2_x_lambda, cfg.r2_y_lambda),
           (cfg.r3_x_lambda, cfg.r3_y_lambda)][: cfg.n_atoms]
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            if math.dist(pos[i], pos[j]) == 0:
                raise ConfigError(f"r{j + 1}_x_lambda", f"atoms {i + 1} and {j + 1} coincide")


def _coerce(name: str, raw):
    try:
        if name in _INT:
            v = parse_number(raw)
            if v != int(v):
                raise ValueError(f"{raw!r} is not an integer")
            return int(v)
        if name in _BOOL:
            return _parse_bool(raw)
        if name in _STR:
            return str(raw)
        return parse_number(raw)
    except ValueError as exc:
        raise ConfigError(name, str(exc)) from None


def from_mapping(data: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(name, "unknown key")
    return ExperimentConfig(**{k: _coerce(k, v) for k, v in data.items()})


def loads(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc)) from None
    if not cp.has_section(SECTION):
        raise ConfigError("<file>", f"missing [{SECTION}] section")
    return from_mapping(dict(cp.items(SECTION)))


def load(path) -> ExperimentConfig:
    return loads(Path(path).read_text(encoding="utf-8"))


def dumps(cfg: ExperimentConfig) -> str:
    lines = [f"[{SECTION}]"]
    for k, v in cfg.to_dict().items():
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
