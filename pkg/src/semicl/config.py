"""JSON run configuration with strict key checking.

Schema (keys not listed here are rejected)::

    {
      "problem": {
        "state": "paper-test"
               | {"gaussian": {"center": 0.0, "gamma": 0.05, "k0": 0.0}}
               | {"wkb": {"center": 0.0, "a": 25.0, "phase": [c0, c1, ...]}},
        "potential": "harmonic" | "zero" | {"custom-polynomial": [c0, c1, ...]},
        "domain": [x_left, x_right],
        "hbar": 0.01
      },
      "discretization": {"m": 12, "dt": 0.01, "steps": 100}     # or "t": 1.0 instead of "steps"
      "scheme": "strang_kvk" | {"name": ..., "c": [...], "d": [...], "p": 2},
      "outputs": {"directory": "out", "cadence": 10, "formats": ["csv", "dump"]},
      "seed": 0
    }

The WKB state is ``exp(-a (x - center)^2) exp(i S(x) / hbar)`` with ``S`` the
polynomial ``sum_k phase[k] x^k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .spectral import Grid1D, WaveFunction, build_grid
from .splitting import SplittingScheme, scheme_from_config
from .states import (
    PotentialSpec,
    WKBData,
    gaussian_packet,
    paper_wkb_data,
    potential_from_config,
    wkb_state,
)

FORMATS = ("csv", "dump")
PAPER_INTERVAL = (-2.0, 2.0)


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


def _check_keys(section: str, data, allowed, required=()) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{section}: unknown key(s) {', '.join(unknown)}")
    missing = [k for k in required if k not in data]
    if missing:
        raise ConfigError(f"{section}: missing key(s) {', '.join(missing)}")
    return data


def _positive(section: str, name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{name}: expected a number, got {value!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(f"{section}.{name}: must be positive and finite")
    return v


@dataclass(frozen=True)
class ProblemConfig:
    state: object = "paper-test"
    potential: object = "harmonic"
    domain: tuple[float, float] = PAPER_INTERVAL
    hbar: float = 0.01

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemConfig":
        _check_keys("problem", data, ("state", "potential", "domain", "hbar"), ("hbar",))
        domain = tuple(float(v) for v in data.get("domain", PAPER_INTERVAL))
        if len(domain) != 2 or not domain[1] > domain[0]:
            raise ConfigError("problem.domain: expected [left, right] with right > left")
        cfg = cls(
            state=data.get("state", "paper-test"),
            potential=data.get("potential", "harmonic"),
            domain=domain,
            hbar=_positive("problem", "hbar", data["hbar"]),
        )
        cfg._validate_state()
        try:
            potential_from_config(cfg.potential)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"problem.potential: {exc}") from None
        return cfg

    def _validate_state(self) -> None:
        s = self.state
        if s == "paper-test":
            if self.domain != PAPER_INTERVAL:
                raise ConfigError(f"problem.state 'paper-test' requires domain {list(PAPER_INTERVAL)}")
            return
        if isinstance(s, dict) and len(s) == 1:
            (kind, params), = s.items()
            if kind == "gaussian":
                _check_keys("problem.state.gaussian", params, ("center", "gamma", "k0"), ("center", "gamma"))
                _positive("problem.state.gaussian", "gamma", params["gamma"])
                return
            if kind == "wkb":
                _check_keys("problem.state.wkb", params, ("center", "a", "phase"), ("center", "a"))
                _positive("problem.state.wkb", "a", params["a"])
                return
        raise ConfigError("problem.state: expected 'paper-test', {'gaussian': {...}} or {'wkb': {...}}")

    @property
    def L(self) -> float:
        return self.domain[1] - self.domain[0]

    def grid(self, m: int) -> Grid1D:
        return build_grid(self.L, m, self.domain[0])

    def potential_spec(self) -> PotentialSpec:
        return potential_from_config(self.potential)

    def initial_state(self, grid: Grid1D) -> WaveFunction:
        s, hbar = self.state, self.hbar
        if s == "paper-test":
            return wkb_state(paper_wkb_data(hbar), grid)
        (kind, p), = s.items()
        if kind == "gaussian":
            return gaussian_packet(float(p["center"]), float(p["gamma"]), float(p.get("k0", 0.0)), hbar, grid)
        c, a = float(p["center"]), float(p["a"])
        phase = np.polynomial.Polynomial([float(v) for v in p.get("phase", [0.0])])
        data = WKBData(lambda x: np.exp(-a * (x - c) ** 2), phase, hbar, phase.deriv())
        return wkb_state(data, grid)


@dataclass(frozen=True)
class DiscretizationConfig:
    m: int
    dt: float
    steps: int

    @classmethod
    def from_dict(cls, data: dict) -> "DiscretizationConfig":
        _check_keys("discretization", data, ("m", "dt", "steps", "t"), ("m", "dt"))
        m = data["m"]
        if not isinstance(m, int) or isinstance(m, bool) or not 1 <= m <= 26:
            raise ConfigError("discretization.m: expected an integer in [1, 26]")
        dt = _positive("discretization", "dt", data["dt"])
        if ("steps" in data) == ("t" in data):
            raise ConfigError("discretization: give exactly one of 'steps' or 't'")
        if "steps" in data:
            steps = data["steps"]
            if not isinstance(steps, int) or isinstance(steps, bool) or steps < 0:
                raise ConfigError("discretization.steps: expected a non-negative integer")
        else:
            t = float(data["t"])
            if t < 0:
                raise ConfigError("discretization.t: must be non-negative")
            ratio = t / dt
            steps = round(ratio)
            if abs(ratio - steps) > 1e-9 * max(1.0, ratio):
                raise ConfigError(f"discretization: t={t} is not an integer multiple of dt={dt}")
        return cls(m, dt, int(steps))

    @property
    def t(self) -> float:
        return self.steps * self.dt


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    cadence: int = 1
    formats: tuple[str, ...] = ("csv",)

    @classmethod
    def from_dict(cls, data: dict) -> "OutputConfig":
        _check_keys("outputs", data, ("directory", "cadence", "formats"))
        cadence = data.get("cadence", 1)
        if not isinstance(cadence, int) or isinstance(cadence, bool) or cadence < 1:
            raise ConfigError("outputs.cadence: expected a positive integer")
        formats = tuple(data.get("formats", ["csv"]))
        bad = [f for f in formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"outputs.formats: unknown format(s) {', '.join(map(str, bad))}")
        return cls(str(data.get("directory", "out")), cadence, formats)


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemConfig
    discretization: DiscretizationConfig
    scheme: object = "strang_kvk"
    outputs: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        _check_keys("config", data, ("problem", "discretization", "scheme", "outputs", "seed"), ("problem", "discretization"))
        cfg = cls(
            problem=ProblemConfig.from_dict(data["problem"]),
            discretization=DiscretizationConfig.from_dict(data["discretization"]),
            scheme=data.get("scheme", "strang_kvk"),
            outputs=OutputConfig.from_dict(data.get("outputs", {})),
            seed=data.get("seed", 0),
        )
        if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or cfg.seed < 0:
            raise ConfigError("seed: expected a non-negative integer")
        cfg.scheme_spec()
        steps, cadence = cfg.discretization.steps, cfg.outputs.cadence
        if steps > 0 and steps % cadence:
            raise ConfigError(f"outputs.cadence={cadence} does not divide steps={steps}")
        return cfg

    def scheme_spec(self) -> SplittingScheme:
        try:
            return scheme_from_config(self.scheme)
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"scheme: {exc}") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["problem"]["domain"] = list(self.problem.domain)
        d["outputs"]["formats"] = list(self.outputs.formats)
        return d


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return RunConfig.from_dict(data)
