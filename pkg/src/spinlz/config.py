"""Flat typed key = value experiment configuration files.

Example::

    spin = 1
    sweep_rate = 1.0
    b_x = 0.0
    noise.x.J = 0.4
    noise.x.tau = 0.008
    ensemble = 200
    seed = 7

Unknown keys are rejected with the offending line; omitted window/step keys
are derived from the built-in rules.  Comments start with '#'.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .noise import NoiseSpec
from .propagator import ExperimentConfig
from .spin_algebra import SpinValue

__all__ = ["parse_document", "parse_config", "build_noise", "config_snapshot"]


def _as_float(raw, key, line):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}", path=key, line=line)


def _as_int(raw, key, line):
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}", path=key, line=line)
    return v


def _as_str(raw, key, line):
    return raw


_SCHEMA = {
    "spin": _as_float,
    "sweep_rate": _as_float,
    "b_x": _as_float,
    "noise.x.J": _as_float,
    "noise.x.tau": _as_float,
    "noise.y.J": _as_float,
    "noise.y.tau": _as_float,
    "noise.z.J": _as_float,
    "noise.z.tau": _as_float,
    "noise.c_xy": _as_float,
    "t_start": _as_float,
    "t_end": _as_float,
    "step": _as_float,
    "ensemble": _as_int,
    "seed": _as_int,
    "initial_state": _as_float,
    "representation": _as_str,
    "window_factor": _as_float,
    "store_points": _as_int,
    "renorm_every": _as_int,
}


def parse_document(text: str) -> dict:
    """Parse a flat config document into a typed dict; reject unknown keys."""
    values = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", path=line, line=lineno)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", path=key, line=lineno)
        if key in values:
            raise ConfigError("duplicate key", path=key, line=lineno)
        values[key] = _SCHEMA[key](raw, key, lineno)
    return values


def build_noise(values: dict) -> NoiseSpec:
    kw = {}
    for axis in "xyz":
        if f"noise.{axis}.J" in values:
            kw[f"j_{axis}"] = values[f"noise.{axis}.J"]
        if f"noise.{axis}.tau" in values:
            kw[f"tau_{axis}"] = values[f"noise.{axis}.tau"]
    if "noise.c_xy" in values:
        kw["c_xy"] = values["noise.c_xy"]
    try:
        return NoiseSpec(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc), path="noise") from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse, validate and complete an experiment configuration."""
    values = parse_document(text)
    for required in ("spin", "sweep_rate"):
        if required not in values:
            raise ConfigError("required key missing", path=required)
    try:
        spin = SpinValue.from_spin(values["spin"])
    except ValueError as exc:
        raise ConfigError(f"spin must be half-integer, got {values['spin']}",
                          path="spin") from exc
    spec = build_noise(values)
    kwargs = dict(
        spin=spin,
        sweep_rate=values["sweep_rate"],
        b_x=values.get("b_x", 0.0),
        spec=spec,
        t_start=values.get("t_start"),
        t_end=values.get("t_end"),
        step=values.get("step"),
        ensemble_size=values.get("ensemble", 1),
        master_seed=values.get("seed", 0),
        representation=values.get("representation", "state-vector"),
    )
    if "initial_state" in values:
        kwargs["initial_state"] = values["initial_state"]
    if "window_factor" in values:
        kwargs["window_factor"] = values["window_factor"]
    if "store_points" in values:
        kwargs["store_points"] = values["store_points"]
    if "renorm_every" in values:
        kwargs["renorm_every"] = values["renorm_every"]
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_snapshot(cfg: ExperimentConfig) -> dict:
    """JSON-ready snapshot of a fully derived configuration."""
    init = cfg.initial_state
    if not np.isscalar(init):
        init = np.asarray(init).tolist()
        init = {"matrix": repr(init)}
    return {
        "spin": cfg.spin.spin,
        "sweep_rate": cfg.sweep_rate,
        "b_x": cfg.b_x,
        "noise": {
            "x": {"J": cfg.spec.j_x, "tau": cfg.spec.tau_x},
            "y": {"J": cfg.spec.j_y, "tau": cfg.spec.tau_y},
            "z": {"J": cfg.spec.j_z, "tau": cfg.spec.tau_z},
            "c_xy": cfg.spec.c_xy,
        },
        "t_start": cfg.t_start,
        "t_end": cfg.t_end,
        "step": cfg.step,
        "n_steps": cfg.n_steps,
        "ensemble": cfg.ensemble_size,
        "seed": cfg.master_seed,
        "initial_state": init,
        "representation": cfg.representation,
        "window_factor": cfg.window_factor,
        "store_points": cfg.store_points,
        "renorm_every": cfg.renorm_every,
    }
