"""Run configuration: JSON file plus command-line overrides.

Defaults describe the reference apparatus: an on/off counter with 55%
detection efficiency and 99.6% interference visibility, a homodyne receiver
with 85.8% efficiency and 0.005 shot-noise units of excess noise, and an
auxiliary oscillator of |gamma|^2 = 24.7 photons.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import DomainError
from .experiments import ENGINES, MODES, RECEIVERS
from .models import DetectorModel, DiscriminationProblem, DisplacementSetup, HomodyneModel

APD_EFFICIENCY = 0.55
VISIBILITY = 0.996
HOMODYNE_EFFICIENCY = 0.858
EXCESS_NOISE = 0.005
GAMMA2 = 24.7
ALPHA2 = 0.16

POLICIES = ("optimize", "fixed_gamma", "fixed_beta")
FORMATS = ("csv", "json")
# metadata only; no timing is simulated
PULSE_WINDOW_NS = 800.0
REPETITION_RATE_HZ = 100e3


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass
class RunConfig:
    alpha2: float = ALPHA2
    # grids: an explicit list, or {"start": a, "stop": b, "points": n}
    alpha2_grid: list[float] | dict = field(
        default_factory=lambda: {"start": 0.0, "stop": 2.0, "points": 81}
    )
    beta2_grid: list[float] | dict | None = None
    gamma2_grid: list[float] | dict = field(
        default_factory=lambda: [0.5, 1.0, 2.0, 5.0, 10.0, 24.7, 50.0, 100.0, 1000.0, 10000.0]
    )
    eta: float = APD_EFFICIENCY
    nu: float = 0.0
    xi: float = VISIBILITY
    eta_hd: float = HOMODYNE_EFFICIENCY
    excess_noise: float = EXCESS_NOISE
    policy: str = "fixed_gamma"
    transmittance: float = 1.0
    beta: float | None = None
    gamma2: float = GAMMA2
    receivers: list[str] = field(default_factory=lambda: list(RECEIVERS))
    crossover_pair: list[str] = field(default_factory=lambda: ["kennedy", "homodyne"])
    crossover_bracket: list[float] = field(default_factory=lambda: [0.01, 2.0])
    engine: str = "analytic"
    mode: str = "ideal"
    trials: int = 10**4
    seed: int | None = None
    workers: int = 1
    out: str | None = None
    format: str = "csv"

    # --- derived objects ---------------------------------------------------

    @property
    def problem(self) -> DiscriminationProblem:
        return DiscriminationProblem.from_alpha2(self.alpha2)

    @property
    def detector(self) -> DetectorModel:
        return DetectorModel(self.eta, self.nu, self.xi)

    @property
    def homodyne(self) -> HomodyneModel:
        return HomodyneModel(self.eta_hd, self.excess_noise)

    @property
    def sweep_gamma2(self) -> float | None:
        return self.gamma2 if self.policy == "fixed_gamma" else None

    def grid(self, name: str) -> list[float] | None:
        value = getattr(self, name)
        if value is None:
            return None
        if isinstance(value, dict):
            return np.linspace(value["start"], value["stop"], value["points"]).tolist()
        return [float(v) for v in value]

    def needs_seed(self) -> bool:
        return self.engine in ("montecarlo", "both")

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> RunConfig:
        _choice("policy", self.policy, POLICIES)
        _choice("engine", self.engine, ENGINES)
        _choice("mode", self.mode, MODES)
        _choice("format", self.format, FORMATS)
        for key in ("alpha2", "eta", "nu", "xi", "eta_hd", "excess_noise",
                    "transmittance", "gamma2"):
            _number(key, getattr(self, key))
        if self.beta is not None:
            _number("beta", self.beta)
        for key in ("trials", "workers"):
            _integer(key, getattr(self, key), minimum=1)
        if self.seed is not None:
            _integer("seed", self.seed, minimum=0)
        for key in ("alpha2_grid", "gamma2_grid", "beta2_grid"):
            _grid(key, getattr(self, key), optional=key == "beta2_grid")
        if not isinstance(self.crossover_bracket, list):
            raise ConfigError("crossover_bracket: expected [lo, hi]")
        for v in self.crossover_bracket:
            _number("crossover_bracket", v)
        for key in ("receivers", "crossover_pair"):
            names = getattr(self, key)
            if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
                raise ConfigError(f"{key}: expected a list of receiver names, got {names!r}")
            for n in names:
                _choice(key, n, RECEIVERS)
        if len(self.crossover_pair) != 2:
            raise ConfigError("crossover_pair: expected two receiver names")
        if len(self.crossover_bracket) != 2:
            raise ConfigError("crossover_bracket: expected [lo, hi]")
        if self.gamma2 <= 0:
            raise ConfigError(f"gamma2: must be positive, got {self.gamma2}")
        if self.policy == "fixed_beta" and self.beta is None:
            raise ConfigError("beta: required when policy is 'fixed_beta'")
        if self.out is not None and not isinstance(self.out, str):
            raise ConfigError(f"out: expected a path string, got {self.out!r}")
        # model invariants, reported against the config key that broke them
        checks = {
            "alpha2": lambda: self.problem,
            "eta": lambda: DetectorModel(eta=self.eta),
            "nu": lambda: DetectorModel(nu=self.nu),
            "xi": lambda: DetectorModel(xi=self.xi),
            "eta_hd": lambda: HomodyneModel(efficiency=self.eta_hd),
            "excess_noise": lambda: HomodyneModel(excess_noise=self.excess_noise),
            "transmittance": lambda: DisplacementSetup(self.transmittance, 0.0),
            "beta": lambda: DisplacementSetup(1.0, self.beta or 0.0),
        }
        for key, check in checks.items():
            try:
                check()
            except DomainError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        return self


def _choice(key, value, options):
    if value not in options:
        raise ConfigError(f"{key}: expected one of {list(options)}, got {value!r}")


def _grid(key, value, optional=False):
    if value is None and optional:
        return
    if isinstance(value, dict):
        if set(value) != {"start", "stop", "points"}:
            raise ConfigError(f"{key}: a grid object needs exactly start, stop and points")
        _number(key, value["start"])
        _number(key, value["stop"])
        _integer(key, value["points"], minimum=1)
        return
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key}: expected a non-empty list or grid object, got {value!r}")
    for v in value:
        _number(key, v)


def _number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {value!r}")


def _integer(key, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{key}: expected an integer >= {minimum}, got {value!r}")


_FIELDS = {f.name for f in fields(RunConfig)}


def config_from_mapping(data: dict, base: RunConfig | None = None) -> RunConfig:
    """Apply ``data`` on top of ``base``; unknown keys are rejected.

    A document written by this package (with ``"config"`` and ``"provenance"``
    blocks) is accepted too, so outputs can be re-run directly.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"config: expected a JSON object, got {type(data).__name__}")
    if "config" in data and "provenance" in data:
        data = data["config"]
    cfg = RunConfig(**(base.to_dict() if base else {}))
    for key, value in data.items():
        if key not in _FIELDS:
            raise ConfigError(f"{key}: unknown configuration key")
        setattr(cfg, key, value)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return config_from_mapping(data)
