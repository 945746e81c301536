"""Ground-truth worlds, the agent motion model and episode stepping."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .belief import BOUNDS_TOL, DomainError, GPBelief, KernelParams

DYNAMIC_BOUNDS = ((0.0, 5.0), (0.0, 5.0))
DATASET_HEADER = ("x", "y", "z", "value")


class DatasetError(ValueError):
    """Malformed or empty dataset file."""


class IllegalActionError(ValueError):
    """Action not available from the current state."""


def dynamic_function(x: float, y: float, t: float) -> float:
    """Gaussian bump circling (2, 2) at radius 1.5, twelve times over t in [0, 1]."""
    if not (0.0 <= x <= 5.0 and 0.0 <= y <= 5.0 and 0.0 <= t <= 1.0):
        raise DomainError(f"dynamic function defined on [0,5]x[0,5]x[0,1], got ({x}, {y}, {t})")
    return _dynamic(x, y, t)


def _dynamic(x, y, t):
    w = 24.0 * math.pi * t
    gx = (x - 2.0 - 1.5 * math.sin(w)) / 0.7
    gy = (y - 2.0 - 1.5 * math.cos(w)) / 0.7
    return math.exp(-gx * gx) * math.exp(-gy * gy)


def dynamic_function_grid(x, y, t) -> np.ndarray:
    """Vectorized :func:`dynamic_function` (no domain check)."""
    x, y, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))
    w = 24.0 * np.pi * t
    gx = (x - 2.0 - 1.5 * np.sin(w)) / 0.7
    gy = (y - 2.0 - 1.5 * np.cos(w)) / 0.7
    return np.exp(-gx * gx) * np.exp(-gy * gy)


@dataclass(frozen=True)
class Workspace:
    spatial_bounds: tuple
    grid_resolution: float
    time_horizon: int

    def __post_init__(self):
        for lo, hi in self.spatial_bounds:
            if not lo < hi:
                raise ValueError(f"invalid bound ({lo}, {hi})")
        if not self.grid_resolution > 0:
            raise ValueError("grid_resolution must be > 0")
        if self.time_horizon < 1:
            raise ValueError("time_horizon must be >= 1")

    def contains(self, position) -> bool:
        return all(lo - BOUNDS_TOL <= p <= hi + BOUNDS_TOL
                   for p, (lo, hi) in zip(position, self.spatial_bounds))


@dataclass(frozen=True)
class AgentState:
    position: tuple
    step_index: int = 0


@dataclass(frozen=True)
class MotionModel:
    """Discrete action set: one displacement vector per action id."""

    displacements: tuple
    step_length: float

    @classmethod
    def grid8(cls, spacing: float) -> "MotionModel":
        d = tuple((dx * spacing, dy * spacing)
                  for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0))
        return cls(d, spacing)

    @classmethod
    def compass3d(cls, step: float = 3.0, vertical: bool = True) -> "MotionModel":
        """8 horizontal compass directions (+ up/down) of Euclidean length ``step``."""
        d = [(step * math.cos(k * math.pi / 4), step * math.sin(k * math.pi / 4), 0.0)
             for k in range(8)]
        if vertical:
            d += [(0.0, 0.0, -step), (0.0, 0.0, step)]
        return cls(tuple(d), step)


def neighbors(state: AgentState, workspace: Workspace, motion: MotionModel) -> list:
    """Ids of the actions that keep the agent inside the workspace."""
    out = []
    for i, d in enumerate(motion.displacements):
        if workspace.contains([p + dp for p, dp in zip(state.position, d)]):
            out.append(i)
    return out


class GroundTruth:
    """Evaluable world: ``truth(position, t)`` with ``t`` the normalized episode time."""

    def __init__(self, kind: str, payload, value_range: tuple):
        if kind not in ("analytic-dynamic", "interpolated-grid"):
            raise ValueError(f"unknown ground-truth kind {kind!r}")
        self.kind = kind
        self.payload = payload
        self.value_range = value_range

    def __call__(self, position, t: float) -> float:
        if self.kind == "analytic-dynamic":
            return dynamic_function(position[0], position[1], t)
        return self.payload.posterior(position).mean

    @classmethod
    def dynamic(cls) -> "GroundTruth":
        return cls("analytic-dynamic", dynamic_function, (0.0, 1.0))


def load_grid_dataset(path, kernel: KernelParams) -> GroundTruth:
    """Read an ``x,y,z,value`` CSV and interpolate it with a noiseless GP."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset not found: {path}")
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: empty file")
        if tuple(h.strip() for h in header) != DATASET_HEADER:
            raise DatasetError(f"{path}: header must be {','.join(DATASET_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise DatasetError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise DatasetError(f"{path}:{lineno}: non-numeric value") from exc
    if not rows:
        raise DatasetError(f"{path}: dataset has no rows")
    data = np.array(rows)
    X, y = data[:, :3], data[:, 3]
    lo, hi = X.min(axis=0), X.max(axis=0)
    # degenerate axes (all rows share a coordinate) still need a non-empty box
    hi = np.where(hi > lo, hi, lo + 1.0)
    bounds = tuple(zip(lo.tolist(), hi.tolist()))
    gp = GPBelief.from_data(kernel, bounds, X, y)
    return GroundTruth("interpolated-grid", gp, (float(y.min()), float(y.max())))


def generate_dataset(path, seed: int = 0, shape=(12, 12, 4),
                     extent=(186.0, 210.0, 15.0)) -> int:
    """Write a synthetic stand-in for a survey dataset (three anisotropic blobs).

    Returns the number of rows written.
    """
    rng = np.random.default_rng(seed)
    centers = rng.uniform([0.15, 0.15, 0.1], [0.85, 0.85, 0.9], size=(3, 3)) * np.array(extent)
    widths = rng.uniform([25.0, 25.0, 3.0], [60.0, 60.0, 8.0], size=(3, 3))
    amps = rng.uniform(2.0, 8.0, size=3)
    axes = [np.linspace(0.0, e, n) for e, n in zip(extent, shape)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    vals = np.full(len(pts), 0.5)
    for c, w, a in zip(centers, widths, amps):
        vals += a * np.exp(-0.5 * np.sum(((pts - c) / w) ** 2, axis=1))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_HEADER)
        for p, v in zip(pts, vals):
            writer.writerow([f"{p[0]:.6f}", f"{p[1]:.6f}", f"{p[2]:.6f}", f"{v:.9f}"])
    return len(pts)


class Environment:
    """A world plus its workspace, motion model and start state.

    Use :meth:`dynamic` or :meth:`grid_dataset` to build one.
    """

    def __init__(self, truth: GroundTruth, workspace: Workspace, motion: MotionModel,
                 start: tuple, time_axis: bool, noise_std: float = 0.0):
        self.truth = truth
        self.workspace = workspace
        self.motion = motion
        self.start = tuple(float(p) for p in start)
        self.time_axis = time_axis
        self.noise_std = float(noise_std)
        self._displacements = np.array(motion.displacements, dtype=float)
        self._nbr_cache: dict = {}

    @classmethod
    def dynamic(cls, T: int = 200, grid_resolution: float = 0.25, noise_std: float = 0.0) -> "Environment":
        ws = Workspace(DYNAMIC_BOUNDS, grid_resolution, T)
        return cls(GroundTruth.dynamic(), ws, MotionModel.grid8(grid_resolution),
                   (2.5, 2.5), time_axis=True, noise_std=noise_std)

    @classmethod
    def grid_dataset(cls, path, T: int = 200, truth_kernel: Optional[KernelParams] = None,
                     step_length: float = 3.0, vertical: bool = True,
                     noise_std: float = 0.0) -> "Environment":
        truth = load_grid_dataset(path, truth_kernel or KernelParams(lengthscale=25.0, signal_variance=4.0))
        bounds = truth.payload.bounds
        ws = Workspace(bounds, step_length, T)
        start = (0.5 * (bounds[0][0] + bounds[0][1]), 0.5 * (bounds[1][0] + bounds[1][1]), bounds[2][0])
        return cls(truth, ws, MotionModel.compass3d(step_length, vertical), start,
                   time_axis=False, noise_std=noise_std)

    @property
    def T(self) -> int:
        return self.workspace.time_horizon

    @property
    def value_range(self) -> float:
        lo, hi = self.truth.value_range
        return hi - lo

    def belief_bounds(self) -> tuple:
        b = tuple(self.workspace.spatial_bounds)
        return b + ((0.0, 1.0),) if self.time_axis else b

    def start_state(self) -> AgentState:
        return AgentState(self.start, 0)

    def neighbors(self, state: AgentState) -> list:
        return list(self.legal_actions(state.position))

    def legal_actions(self, position) -> tuple:
        key = tuple(round(p, 9) for p in position)
        acts = self._nbr_cache.get(key)
        if acts is None:
            acts = tuple(neighbors(AgentState(tuple(position)), self.workspace, self.motion))
            self._nbr_cache[key] = acts
        return acts

    def move(self, position, action: int) -> tuple:
        return tuple(p + d for p, d in zip(position, self.motion.displacements[action]))

    def normalized_time(self, step_index: int) -> float:
        return step_index / self.T

    def gp_point(self, position, step_index: int) -> np.ndarray:
        """Belief input for a position visited at ``step_index``."""
        if self.time_axis:
            return np.array((*position, self.normalized_time(step_index)))
        return np.array(position, dtype=float)

    def step(self, state: AgentState, action: int, rng: Optional[np.random.Generator] = None):
        return env_step(self, state, action, rng)


def env_step(env: Environment, state: AgentState, action: int,
             rng: Optional[np.random.Generator] = None):
    """Apply ``action``; returns ``(new_state, observed_value)``.

    Draws one standard normal from ``rng`` iff the environment is noisy.
    """
    if action not in env.legal_actions(state.position):
        raise IllegalActionError(f"action {action} is not legal at {state.position}")
    if state.step_index >= env.T:
        raise IllegalActionError("episode is over")
    pos = env.move(state.position, action)
    new = AgentState(pos, state.step_index + 1)
    value = env.truth(pos, env.normalized_time(new.step_index))
    if env.noise_std > 0:
        if rng is None:
            raise ValueError("noisy environment needs an rng")
        value += env.noise_std * rng.standard_normal()
    return new, value


def export_truth_slices(truth: GroundTruth, threshold: float, path, resolution: float = 0.1,
                        time_steps: int = 201, bounds: Optional[Sequence] = None) -> int:
    """Write lattice samples of ``truth`` with value >= ``threshold`` to CSV.

    The dynamic world is sampled on an (x, y, t) lattice; a dataset world
    on an (x, y, z) lattice. Returns the number of data rows written.
    """
    path = Path(path)
    if truth.kind == "analytic-dynamic":
        bounds = bounds or DYNAMIC_BOUNDS
        xs = _axis(bounds[0], resolution)
        ys = _axis(bounds[1], resolution)
        ts = np.linspace(0.0, 1.0, time_steps)
        gx, gy, gt = np.meshgrid(xs, ys, ts, indexing="ij")
        vals = dynamic_function_grid(gx, gy, gt)
        header = ("x", "y", "t", "value")
        cols = (gx.ravel(), gy.ravel(), gt.ravel())
    else:
        bounds = bounds or truth.payload.bounds
        axes = [_axis(b, resolution) for b in bounds]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        vals = truth.payload.posterior_mean_batch(pts)
        header = ("x", "y", "z", "value")
        cols = tuple(pts.T)
    vals = vals.ravel()
    keep = vals >= threshold
    try:
        fh = path.open("w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    with fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*(c[keep] for c in cols), vals[keep]):
            writer.writerow([f"{v:.6g}" for v in row[:-1]] + [f"{row[-1]:.9g}"])
    return int(keep.sum())


def _axis(bound, step):
    lo, hi = bound
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)
