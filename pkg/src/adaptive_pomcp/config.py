"""Experiment configuration, loaded from JSON with strict key checking."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .allocation import AllocationCurve
from .belief import KernelParams
from .commitment import CommitmentPolicy
from .environments import Environment
from .pomcp import EXPLORERS, SearchConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EnvironmentSpec:
    kind: str = "dynamic"  # dynamic | grid-dataset
    path: Optional[str] = None
    grid_resolution: float = 0.25
    step_length: float = 3.0
    vertical: bool = True
    noise_std: float = 0.0
    truth_kernel: Optional[KernelParams] = None

    def __post_init__(self):
        if self.kind not in ("dynamic", "grid-dataset"):
            raise ConfigError(f"unknown environment kind {self.kind!r}")
        if self.kind == "grid-dataset" and not self.path:
            raise ConfigError("grid-dataset environment needs a path")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be non-negative")

    def build(self, T: int) -> Environment:
        if self.kind == "dynamic":
            return Environment.dynamic(T, self.grid_resolution, self.noise_std)
        return Environment.grid_dataset(self.path, T, self.truth_kernel, self.step_length,
                                        self.vertical, self.noise_std)


def default_kernel(env_kind: str) -> KernelParams:
    """Planning-belief kernel; the small nugget keeps long episodes well conditioned."""
    if env_kind == "dynamic":
        # signal variance ~ mean square of the dynamic function over its domain
        return KernelParams(lengthscale=0.5, signal_variance=0.03, noise_variance=3e-6, time_lengthscale=0.05)
    return KernelParams(lengthscale=25.0, signal_variance=4.0, noise_variance=4e-4)


def default_curve(env_kind: str) -> AllocationCurve:
    return AllocationCurve.beta(6, 1) if env_kind == "dynamic" else AllocationCurve.beta(4, 4)


@dataclass(frozen=True)
class ExperimentConfig:
    environment: EnvironmentSpec = field(default_factory=EnvironmentSpec)
    T: int = 200
    c: Optional[float] = None
    total_budget: int = 20000
    curve: AllocationCurve = field(default_factory=lambda: AllocationCurve("fixed"))
    explorer: str = "uct"
    commitment: CommitmentPolicy = field(default_factory=CommitmentPolicy)
    search: SearchConfig = field(default_factory=SearchConfig)
    kernel: Optional[KernelParams] = None
    seeds: tuple = (0, 1, 2, 3, 4)

    def __post_init__(self):
        if self.T < 1:
            raise ConfigError("T must be >= 1")
        if self.total_budget < self.T:
            raise ConfigError(f"total_budget {self.total_budget} < T {self.T}")
        if self.explorer not in EXPLORERS:
            raise ConfigError(f"unknown explorer {self.explorer!r}; choose from {EXPLORERS}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.c is not None and self.c < 0:
            raise ConfigError("c must be non-negative")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def objective_weight(self) -> float:
        if self.c is not None:
            return self.c
        return 10.0 if self.environment.kind == "dynamic" else 100.0

    @property
    def kernel_params(self) -> KernelParams:
        return self.kernel or default_kernel(self.environment.kind)

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    @property
    def label(self) -> str:
        return f"{self.curve.label()}+{self.explorer}+{self.commitment.kind}"


def _strict(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_config(data: dict, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from decoded JSON."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(data)
    names = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(unknown)}")
    env = data.get("environment", "dynamic")
    if isinstance(env, str):
        env = {"kind": env}
    if isinstance(env, dict):
        env = dict(env)
        if "truth_kernel" in env and env["truth_kernel"] is not None:
            env["truth_kernel"] = _strict(KernelParams, env["truth_kernel"], "environment.truth_kernel")
        if env.get("path") and base_dir is not None and not Path(env["path"]).is_absolute():
            env["path"] = str(base_dir / env["path"])
    data["environment"] = _strict(EnvironmentSpec, env, "environment")
    if "curve" in data:
        curve = data["curve"]
        if curve == "fixed":
            curve = {"kind": "fixed"}
        data["curve"] = _strict(AllocationCurve, curve, "curve")
    else:
        data["curve"] = default_curve(data["environment"].kind)
    if "commitment" in data:
        com = data["commitment"]
        data["commitment"] = _strict(CommitmentPolicy, {"kind": com} if isinstance(com, str) else com,
                                     "commitment")
    if "search" in data:
        data["search"] = _strict(SearchConfig, data["search"], "search")
    if data.get("kernel") is not None:
        data["kernel"] = _strict(KernelParams, data["kernel"], "kernel")
    if "seeds" in data:
        seeds = data["seeds"]
        if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
            raise ConfigError("seeds must be a list of integers")
        data["seeds"] = tuple(seeds)
    for key, typ in (("T", int), ("total_budget", int)):
        if key in data and (not isinstance(data[key], int) or isinstance(data[key], bool)):
            raise ConfigError(f"{key} must be an integer")
    try:
        return ExperimentConfig(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(data, base_dir=path.parent)
