"""Scenario files: flat ``key = value`` lines with dotted section prefixes.

Example::

    # physical parameters
    n_atoms = 1e6
    cooperativity = 100
    gamma0_hz = 225e3          # gamma0 / 2pi
    squeezing_r = 1
    gain_g = 1
    input.mean_x = 2
    mc.n_traj = 100000
    sweep.parameter = squeezing_r

Unknown keys, duplicates and unphysical values are rejected with a message
anchored to the offending line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .montecarlo.engine import TrajectoryConfig
from .states import GaussianSpinState, ProtocolParams


class ConfigError(ValueError):
    pass


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _finite(v):
    return math.isfinite(v)


def _int(v):
    return v == int(v)


# key -> (type, default, [(check, message)])
SCHEMA = {
    "n_atoms": (float, 1e6, [(lambda v: v >= 1 and _finite(v), "must be a finite number >= 1")]),
    "cooperativity": (float, 100.0, [(_nonneg, "must be >= 0")]),
    "gamma0_hz": (float, 225e3, [(lambda v: v > 0 and _finite(v), "must be positive and finite")]),
    "squeezing_r": (float, 1.0, [(lambda v: v >= 0 and _finite(v), "must be finite and >= 0")]),
    "gain_g": (float, 1.0, [(_finite, "must be finite")]),
    "input.mean_x": (float, 0.0, [(_finite, "must be finite")]),
    "input.mean_y": (float, 0.0, [(_finite, "must be finite")]),
    "input.var_x": (float, 1.0, [(_pos, "must be > 0")]),
    "input.var_y": (float, 1.0, [(_pos, "must be > 0")]),
    "input.cov_xy": (float, 0.0, [(_finite, "must be finite")]),
    "input.excess_noise": (float, 0.0, [(_nonneg, "must be >= 0")]),
    "mc.dt": (float, 0.01, [(_pos, "must be > 0")]),
    "mc.t_max": (float, 10.0, [(_pos, "must be > 0")]),
    "mc.n_traj": (float, 100_000, [(_int, "must be an integer"), (lambda v: v >= 2, "must be >= 2")]),
    "mc.seed": (int, 12345, [(lambda v: 0 <= v < 2**64, "must be an unsigned 64-bit integer")]),
    "mc.bias_allowance": (float, 0.02, [(_nonneg, "must be >= 0")]),
    "sweep.parameter": (str, None, []),
    "sweep.start": (float, None, [(_finite, "must be finite")]),
    "sweep.stop": (float, None, [(_finite, "must be finite")]),
    "sweep.points": (float, 11, [(_int, "must be an integer"), (lambda v: v >= 1, "must be >= 1")]),
    "sweep.scale": (str, "linear", [(lambda v: v in ("linear", "log"), "must be 'linear' or 'log'")]),
    "swap.r01": (float, 1.0, [(lambda v: v >= 0 and _finite(v), "must be finite and >= 0")]),
    "swap.r23": (float, 1.0, [(lambda v: v >= 0 and _finite(v), "must be finite and >= 0")]),
    "calibration.gyromagnetic_hz_per_gauss": (float, 450e3, [(_pos, "must be > 0")]),
}

SWEEP_ALIASES = {
    "squeezing_r": "squeezing_r", "r": "squeezing_r",
    "cooperativity": "cooperativity", "c": "cooperativity",
    "gain_g": "gain_g", "g": "gain_g",
}


@dataclass
class ScenarioConfig:
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    source: str = "<defaults>"

    def __getitem__(self, key):
        if key in self.values:
            return self.values[key]
        return SCHEMA[key][1]

    def where(self, key) -> str:
        if key in self.lines:
            return f"{self.source}:{self.lines[key]}"
        return f"{self.source}: (default {key})"

    def error(self, key, msg) -> ConfigError:
        return ConfigError(f"{self.where(key)}: {key} {msg}")

    @property
    def gamma0(self) -> float:
        """Angular rate in rad/s; the file stores gamma0 / 2pi in Hz."""
        return 2 * math.pi * self["gamma0_hz"]

    def params(self, **override) -> ProtocolParams:
        kw = dict(n_atoms=self["n_atoms"], cooperativity=self["cooperativity"], gamma0=self.gamma0,
                  squeezing_r=self["squeezing_r"], gain_g=self["gain_g"])
        kw.update(override)
        try:
            return ProtocolParams(**kw)
        except ValueError as exc:
            raise ConfigError(f"{self.source}: {exc}") from None

    def input_state(self) -> GaussianSpinState:
        try:
            return GaussianSpinState(self["input.mean_x"], self["input.mean_y"], self["input.var_x"],
                                     self["input.var_y"], self["input.cov_xy"])
        except ValueError as exc:
            key = next((k for k in ("input.cov_xy", "input.var_x", "input.var_y") if k in self.lines),
                       "input.var_x")
            raise self.error(key, f"gives an unphysical input state ({exc})") from None

    def trajectory_config(self, seed: Optional[int] = None) -> TrajectoryConfig:
        return TrajectoryConfig(dt=self["mc.dt"], t_max=self["mc.t_max"], n_traj=int(self["mc.n_traj"]),
                                seed=self["mc.seed"] if seed is None else seed)

    def sweep_parameter(self) -> str:
        name = self["sweep.parameter"]
        if name is None:
            raise ConfigError(f"{self.source}: sweep.parameter is required for a sweep")
        try:
            return SWEEP_ALIASES[name.lower()]
        except KeyError:
            raise self.error("sweep.parameter", f"unknown parameter {name!r}; choose from "
                             "squeezing_r, cooperativity, gain_g") from None

    def validate(self) -> "ScenarioConfig":
        """Cross-field checks; raises :class:`ConfigError`."""
        self.params()
        self.input_state()
        if self["mc.t_max"] < self["mc.dt"]:
            raise self.error("mc.t_max", "must be at least one time step (mc.dt)")
        if self["sweep.scale"] == "log":
            for k in ("sweep.start", "sweep.stop"):
                if self[k] is not None and self[k] <= 0:
                    raise self.error(k, "must be > 0 for a log sweep")
        return self


def _convert(key, text, lineno, source):
    typ = SCHEMA[key][0]
    try:
        if typ is int:
            try:
                return int(text, 0)
            except ValueError:
                f = float(text)
                if f != int(f):
                    raise
                return int(f)
        if typ is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"{source}:{lineno}: {key}: cannot parse {text!r} as {typ.__name__}") from None


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    cfg = ScenarioConfig(source=source)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in cfg.values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {cfg.lines[key]})")
        if not val:
            raise ConfigError(f"{source}:{lineno}: {key} has no value")
        v = _convert(key, val, lineno, source)
        for check, msg in SCHEMA[key][2]:
            if not check(v):
                raise ConfigError(f"{source}:{lineno}: {key} {msg}, got {val}")
        cfg.values[key] = v
        cfg.lines[key] = lineno
    return cfg.validate()


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, source=str(path))
