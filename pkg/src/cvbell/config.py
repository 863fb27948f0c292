"""TOML run configuration.

Sections: ``[state]`` (required) plus whichever of ``[eval]``, ``[npt]``,
``[sweep]``, ``[experiment]`` and ``[sample]`` the command needs.  Unknown
sections or keys are errors so that a mistyped physics parameter never falls
back silently to a default.  Angles may be written as numbers (radians) or as
strings such as ``"pi/4"``, ``"3*pi/8"`` or ``"-pi"``.
"""

from __future__ import annotations

import inspect
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .experiment import ExperimentConfig
from .inequalities import ANALYTIC_TOL, FAMILIES
from .states import VARIANTS, StateSpec

SECTIONS = ("state", "eval", "npt", "sweep", "experiment", "sample")
SWEEP_AXES = ("r", "theta", "phi", "p_S", "eta", "p_D", "k")

_ANGLE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?:(?P<coef>\d+(?:\.\d*)?)\s*\*?\s*)?pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


def parse_angle(value, where: str = "angle") -> float:
    """Radians from a number or a ``"a*pi/b"`` literal."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected an angle, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _ANGLE.match(value)
        if m:
            x = math.pi * float(m["coef"] or 1) / float(m["den"] or 1)
            return -x if m["sign"] == "-" else x
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{where}: cannot parse angle {value!r}")


def parse_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"{where}: cannot parse complex number {value!r}")


def _check_keys(section: dict, allowed, name: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in [{name}]; allowed: {sorted(allowed)}")


# Configuration names that differ from constructor keyword names.
_STATE_ALIASES = {"N": "n_modes"}
_ANGLE_KEYS = ("theta", "phi")
_COMPLEX_KEYS = ("c1", "c2")


def parse_state(section: dict) -> StateSpec:
    if "variant" not in section:
        raise ConfigError("[state] needs a 'variant' key")
    variant = section["variant"]
    if variant not in VARIANTS:
        raise ConfigError(f"[state] unknown variant {variant!r}; expected one of {sorted(VARIANTS)}")
    accepted = set(inspect.signature(VARIANTS[variant]).parameters)
    allowed = {"variant"} | accepted | {k for k, v in _STATE_ALIASES.items() if v in accepted}
    _check_keys(section, allowed, "state")
    params: dict[str, Any] = {}
    for key, value in section.items():
        if key == "variant":
            continue
        name = _STATE_ALIASES.get(key, key)
        if name in _ANGLE_KEYS:
            value = parse_angle(value, f"[state].{key}")
        elif name in _COMPLEX_KEYS:
            value = parse_complex(value, f"[state].{key}")
        params[name] = value
    try:
        return StateSpec(variant, params)
    except ValueError as exc:
        raise ConfigError(f"[state] {exc}") from None


@dataclass
class RunConfig:
    """Parsed configuration file."""

    path: Path | None
    raw: dict
    state: StateSpec
    sections: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})


def _families(value, where: str) -> tuple[str, ...]:
    value = [value] if isinstance(value, str) else list(value)
    bad = [f for f in value if f not in FAMILIES]
    if bad or not value:
        raise ConfigError(f"{where}: families must be drawn from {FAMILIES}, got {value}")
    return tuple(value)


def parse_eval(section: dict) -> dict:
    _check_keys(section, {"families", "k", "tol", "eta"}, "eval")
    out = {
        "families": _families(section.get("families", list(FAMILIES)), "[eval].families"),
        "tol": float(section.get("tol", ANALYTIC_TOL)),
        "eta": float(section.get("eta", 1.0)),
        "k": section.get("k"),
    }
    if out["k"] is not None:
        out["k"] = [int(k) for k in ([out["k"]] if isinstance(out["k"], int) else out["k"])]
    if not 0 <= out["eta"] <= 1:
        raise ConfigError("[eval].eta must lie in [0, 1]")
    return out


def parse_npt(section: dict) -> dict:
    _check_keys(section, {"modes"}, "npt")
    modes = section.get("modes")
    return {"modes": None if modes is None else [int(m) for m in modes]}


def parse_sweep(section: dict) -> dict:
    _check_keys(section, {"axis", "values", "families", "eta", "tol"}, "sweep")
    axis = section.get("axis")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"[sweep].axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = section.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("[sweep].values must be a non-empty list")
    if axis in ("theta", "phi"):
        values = [parse_angle(v, f"[sweep].values[{i}]") for i, v in enumerate(values)]
    elif axis == "k":
        values = [int(v) for v in values]
    else:
        values = [float(v) for v in values]
    return {
        "axis": axis,
        "values": values,
        "families": _families(section.get("families", list(FAMILIES)), "[sweep].families"),
        "eta": float(section.get("eta", 1.0)),
        "tol": float(section.get("tol", ANALYTIC_TOL)),
    }


_EXPERIMENT_KEYS = (
    "family", "eta", "p_d", "setting_probs", "trials", "seed", "shards",
    "min_cell", "sigma", "points", "half_width",
)


def parse_experiment(section: dict, state: StateSpec, seed: int | None = None) -> ExperimentConfig:
    _check_keys(section, _EXPERIMENT_KEYS, "experiment")
    kwargs = dict(section)
    probs = kwargs.get("setting_probs")
    if probs is not None:
        if probs and not isinstance(probs[0], list):
            probs = [probs, probs]
        kwargs["setting_probs"] = tuple(tuple(float(p) for p in row) for row in probs)
    if seed is not None:
        kwargs["seed"] = seed
    try:
        return ExperimentConfig(state=state, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[experiment] {exc}") from None


def parse_sample(section: dict, seed: int | None = None) -> dict:
    _check_keys(section, {"measurement", "thetas", "modes", "trials", "eta", "seed", "stream", "points", "half_width"}, "sample")
    kind = section.get("measurement", "homodyne")
    if kind not in ("homodyne", "counts"):
        raise ConfigError("[sample].measurement must be 'homodyne' or 'counts'")
    out = {
        "measurement": kind,
        "thetas": [parse_angle(t, "[sample].thetas") for t in section.get("thetas", [0.0, 0.0])],
        "modes": section.get("modes"),
        "trials": int(section.get("trials", 10_000)),
        "eta": float(section.get("eta", 1.0)),
        "seed": int(seed if seed is not None else section.get("seed", 0)),
        "stream": int(section.get("stream", 0)),
        "points": int(section.get("points", 2048)),
        "half_width": section.get("half_width"),
    }
    if out["trials"] < 1:
        raise ConfigError("[sample].trials must be positive")
    return out


def parse_config(raw: dict, path: Path | None = None) -> RunConfig:
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown section(s) {unknown}; allowed: {list(SECTIONS)}")
    for name, value in raw.items():
        if not isinstance(value, dict):
            raise ConfigError(f"'{name}' must be a [section]")
    if "state" not in raw:
        raise ConfigError("missing [state] section")
    state = parse_state(raw["state"])
    sections = {name: raw[name] for name in SECTIONS if name in raw and name != "state"}
    return RunConfig(path, raw, state, sections)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw, path)


def loads_config(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc)) from None
    return parse_config(raw)
