"""Strict JSON run configuration.

Every section is optional and falls back to the Ethereum example values;
unknown keys and wrongly typed values are rejected before anything runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .optimizer import RewardModel, UtilityConfig
from .simulator import SimConfig
from .stochastic import ArrivalModel
from .verification import Tolerances


class ConfigError(ValueError):
    pass


BUNDLED = {"paper": "paper.json"}

_SECTIONS = {
    "seed": None,
    "arrival": {"lambda_x": float, "lambda_y": float},
    "reward": {"r_max": float, "slope": float, "offset": float},
    "utility": {"p_min": float, "lambda_x_max": float, "c1": float, "c2": float,
                "deposit": float, "lipschitz": float},
    "tolerances": {"delta_val": float, "delta_ver": float},
    "simulation": {"slots": int, "providers": int, "malicious_fraction": float,
                   "deposit": float, "officer_deposit": float, "task_dimension": int,
                   "officers": int, "witnesses": int, "repository_size": int,
                   "corruption": float, "initial_pool": float, "reward_window": int},
    "sweep": {"deposits": list, "c1": list},
    "output": {"summary": str, "trajectory": str, "csv": str},
}


@dataclass
class RunConfig:
    seed: int = 0
    arrival: ArrivalModel = field(default_factory=lambda: ArrivalModel(33.4, 1000.0))
    reward: RewardModel = field(default_factory=RewardModel)
    utility: dict = field(default_factory=dict)
    tolerances: Tolerances = field(default_factory=Tolerances)
    simulation: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def utility_config(self) -> UtilityConfig:
        return UtilityConfig(reward=self.reward, lambda_y=self.arrival.lambda_y, **self.utility)

    def sim_config(self) -> SimConfig:
        sim = dict(self.simulation)
        slots = sim.pop("slots", 10_000)
        return SimConfig(slots=slots, arrival=self.arrival, reward=self.reward,
                         tolerances=self.tolerances, seed=self.seed, **sim)


def _check_value(section: str, key: str, kind, value):
    where = f"{section}.{key}"
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{where}: must be finite")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{where}: expected a list of numbers")
        return [float(v) for v in value]
    if not isinstance(value, kind):
        raise ConfigError(f"{where}: expected {kind.__name__}")
    return value


def parse_config(obj) -> RunConfig:
    if not isinstance(obj, dict):
        raise ConfigError("top level must be a JSON object")
    unknown = sorted(set(obj) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(unknown)}")
    parsed = {}
    for name, schema in _SECTIONS.items():
        if name not in obj or schema is None:
            continue
        body = obj[name]
        if not isinstance(body, dict):
            raise ConfigError(f"{name}: expected an object")
        bad = sorted(set(body) - set(schema))
        if bad:
            raise ConfigError(f"{name}: unknown keys: {', '.join(bad)}")
        parsed[name] = {k: _check_value(name, k, schema[k], v) for k, v in body.items()}

    seed = obj.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed: expected an unsigned 64-bit integer")

    try:
        cfg = RunConfig(seed=seed)
        if "arrival" in parsed:
            base = {"lambda_x": 33.4, "lambda_y": 1000.0} | parsed["arrival"]
            cfg.arrival = ArrivalModel(**base)
        if "reward" in parsed:
            cfg.reward = RewardModel(**parsed["reward"])
        if "tolerances" in parsed:
            cfg.tolerances = Tolerances(**parsed["tolerances"])
        cfg.utility = parsed.get("utility", {})
        cfg.simulation = parsed.get("simulation", {})
        cfg.sweep = parsed.get("sweep", {})
        cfg.output = parsed.get("output", {})
        # surface invalid parameter combinations now rather than mid-run
        cfg.utility_config()
        cfg.sim_config()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("entrapnet") / "configs" / BUNDLED[name]))


def load_config(path) -> RunConfig:
    """Read and validate a config file; ``"paper"`` names the bundled example."""
    if str(path) in BUNDLED:
        path = bundled_path(str(path))
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(obj)
