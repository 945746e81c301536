"""Seeded episode runs, multi-seed experiments, grid search and comparisons."""

from __future__ import annotations

import csv
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .allocation import AllocationCurve, build_schedule, grid_candidates
from .belief import ConditioningError, GPBelief, objective_reward
from .commitment import CommitmentPolicy, extract_plan
from .config import ExperimentConfig, default_curve
from .environments import env_step
from .pomcp import Planner, discretize_observation

log = logging.getLogger(__name__)

EPISODE_HEADER = ("seed", "step", "rollouts_used", "actions_committed", "reward", "cumulative_reward", "wall_ms")
SUMMARY_HEADER = ("method", "seed", "total_reward", "total_rollouts", "total_wall_ms")


@dataclass(frozen=True)
class EpisodeRow:
    seed: int
    step: int
    rollouts_used: int
    actions_committed: int
    reward: float
    cumulative_reward: float
    wall_ms: float
    truth_value: float = math.nan  # ground-truth value at the visited point (diagnostic)


@dataclass
class EpisodeLog:
    seed: int
    rows: list = field(default_factory=list)
    planning_calls: int = 0
    bin_mismatches: int = 0
    skipped_observations: int = 0
    final_rmse: float = math.nan
    schedule_total: int = 0

    @property
    def total_rollouts(self) -> int:
        return sum(r.rollouts_used for r in self.rows)

    @property
    def total_reward(self) -> float:
        return self.rows[-1].cumulative_reward if self.rows else 0.0

    @property
    def total_wall_ms(self) -> float:
        return sum(r.wall_ms for r in self.rows)

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(EPISODE_HEADER)
            for r in self.rows:
                w.writerow([r.seed, r.step, r.rollouts_used, r.actions_committed,
                            repr(r.reward), repr(r.cumulative_reward), f"{r.wall_ms:.3f}"])


@dataclass
class RunSummary:
    method: str
    logs: list

    @property
    def seeds(self) -> list:
        return [lg.seed for lg in self.logs]

    @property
    def rewards(self) -> list:
        return [lg.total_reward for lg in self.logs]

    @property
    def rollouts(self) -> list:
        return [lg.total_rollouts for lg in self.logs]

    @property
    def wall_ms(self) -> list:
        return [lg.total_wall_ms for lg in self.logs]

    @property
    def mean_reward(self) -> float:
        return statistics.fmean(self.rewards)

    @property
    def std_reward(self) -> float:
        return statistics.stdev(self.rewards) if len(self.logs) > 1 else 0.0

    @property
    def mean_rollouts(self) -> float:
        return statistics.fmean(self.rollouts)

    @property
    def std_rollouts(self) -> float:
        return statistics.stdev(self.rollouts) if len(self.logs) > 1 else 0.0

    @property
    def total_wall_ms(self) -> float:
        return sum(self.wall_ms)

    def summary_rows(self) -> list:
        return [(self.method, lg.seed, lg.total_reward, lg.total_rollouts, lg.total_wall_ms)
                for lg in self.logs]


def initial_belief(cfg: ExperimentConfig, env) -> GPBelief:
    """Prior belief plus the sample taken at the start position."""
    belief = GPBelief(cfg.kernel_params, env.belief_bounds(), env.time_axis)
    start = env.start_state()
    return belief.add_observation(env.gp_point(start.position, 0), env.truth(start.position, 0.0))


def _final_rmse(env, belief) -> float:
    lo_hi = env.workspace.spatial_bounds
    axes = [np.linspace(lo, hi, 11) for lo, hi in lo_hi]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    t = 1.0
    truth = np.array([env.truth(tuple(p), t) for p in pts])
    if env.time_axis:
        pts = np.hstack([pts, np.full((len(pts), 1), t)])
    est = belief.posterior_mean_batch(pts)
    return float(np.sqrt(np.mean((est - truth) ** 2)))


def run_episode(cfg: ExperimentConfig, seed: int, env=None) -> EpisodeLog:
    """Run one seeded episode of ``cfg.T`` environment steps.

    All randomness (simulated observations, rollout actions, observation
    noise) comes from one generator seeded with ``seed``.
    """
    env = env if env is not None else cfg.environment.build(cfg.T)
    c = cfg.objective_weight
    rng = np.random.default_rng(seed)
    planner = Planner(env, c, cfg.search, rng)
    bin_width = cfg.search.bin_width(env)
    state = env.start_state()
    # floor: enough rollouts to try every action once, wherever the agent is
    schedule = build_schedule(cfg.curve, cfg.total_budget, cfg.T, len(env.motion.displacements))
    belief = initial_belief(cfg, env)
    lg = EpisodeLog(seed, schedule_total=schedule.total)
    pending, pending_bins = [], []
    cumulative = 0.0
    for step in range(cfg.T):
        if pending:
            action = pending.pop(0)
            used, committed, wall_ms = 0, 0, 0.0
        else:
            used = schedule[step]
            t0 = time.perf_counter()
            tree = planner.plan(belief, state, used, cfg.explorer)
            committed_plan = extract_plan(tree, cfg.commitment, limit=cfg.T - step)
            wall_ms = (time.perf_counter() - t0) * 1e3
            lg.planning_calls += 1
            action = committed_plan.actions[0]
            pending = list(committed_plan.actions[1:])
            pending_bins = list(committed_plan.bins)
            committed = len(committed_plan.actions)
        new_state, value = env_step(env, state, action, rng)
        x = env.gp_point(new_state.position, new_state.step_index)
        reward = objective_reward(belief.posterior(x), c)
        cumulative += reward
        truth_value = env.truth(new_state.position, env.normalized_time(new_state.step_index))
        if pending_bins:
            # observation branch the next committed action was planned under
            if discretize_observation(value, bin_width) != pending_bins.pop(0):
                lg.bin_mismatches += 1
        try:
            belief = belief.add_observation(x, value)
        except ConditioningError:
            lg.skipped_observations += 1
        lg.rows.append(EpisodeRow(seed, step, used, committed, reward, cumulative, wall_ms, truth_value))
        state = new_state
    lg.final_rmse = _final_rmse(env, belief)
    return lg


def _episode_job(args):
    cfg, seed, episode_fn = args
    return episode_fn(cfg, seed)


def run_experiment(cfg: ExperimentConfig, seeds=None, out_dir=None, method: Optional[str] = None,
                   episode_fn: Callable = run_episode, jobs: int = 1) -> RunSummary:
    """Run every seed; optionally write one CSV per episode plus ``summary.csv``."""
    seeds = tuple(cfg.seeds if seeds is None else seeds)
    method = method or cfg.label
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            logs = list(pool.map(_episode_job, [(cfg, s, episode_fn) for s in seeds]))
    else:
        logs = [episode_fn(cfg, s) for s in seeds]
    summary = RunSummary(method, logs)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for lg in logs:
            lg.write_csv(out / f"{_slug(method)}_seed{lg.seed}.csv")
        write_summary(out / "summary.csv", [summary])
    return summary


def write_summary(path, summaries) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for s in summaries:
            for method, seed, reward, rollouts, wall in s.summary_rows():
                w.writerow([method, seed, repr(reward), rollouts, f"{wall:.3f}"])


def _slug(s: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in s)


def grid_search(cfg: ExperimentConfig, episode_fn: Callable = run_episode, out_path=None,
                jobs: int = 1) -> list:
    """Rank the 49 beta curves by mean final cumulative reward (descending)."""
    results = []
    for curve in grid_candidates():
        summary = run_experiment(cfg.with_(curve=curve), episode_fn=episode_fn, jobs=jobs)
        results.append((curve, summary.mean_reward, summary.mean_rollouts))
        log.info("%s: reward %.4f rollouts %.1f", curve.label(), summary.mean_reward, summary.mean_rollouts)
    ranked = sorted(results, key=lambda r: -r[1])
    if out_path is not None:
        with Path(out_path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("rank", "alpha", "beta", "mean_reward", "mean_rollouts"))
            for i, (curve, reward, rollouts) in enumerate(ranked, 1):
                w.writerow([i, curve.alpha, curve.beta_param, repr(reward), rollouts])
    return [(curve, reward) for curve, reward, _ in ranked]


def baseline_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Even split, UCT at the root, one action per planning call."""
    return cfg.with_(curve=AllocationCurve("fixed"), explorer="uct", commitment=CommitmentPolicy("single"))


def proposed_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Beta-curve split, UGapEb at the root, Welch commitment at p = 0.05."""
    curve = cfg.curve if cfg.curve.kind == "beta" else default_curve(cfg.environment.kind)
    policy = CommitmentPolicy("welch", p_threshold=0.05, max_commit=cfg.commitment.max_commit)
    return cfg.with_(curve=curve, explorer="ugapeb", commitment=policy)


@dataclass
class Comparison:
    baseline: RunSummary
    proposed: RunSummary

    @property
    def rollout_ratio(self) -> float:
        return self.proposed.mean_rollouts / self.baseline.mean_rollouts

    @property
    def wall_ratio(self) -> float:
        return self.proposed.total_wall_ms / self.baseline.total_wall_ms

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "comparison.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("seed", "step", "baseline_reward", "baseline_cumulative_reward", "baseline_rollouts",
                        "proposed_reward", "proposed_cumulative_reward", "proposed_rollouts"))
            for lb, lp in zip(self.baseline.logs, self.proposed.logs):
                for rb, rp in zip(lb.rows, lp.rows):
                    w.writerow([rb.seed, rb.step, repr(rb.reward), repr(rb.cumulative_reward), rb.rollouts_used,
                                repr(rp.reward), repr(rp.cumulative_reward), rp.rollouts_used])
        write_summary(out / "summary.csv", [self.baseline, self.proposed])


def compare_baseline(cfg: ExperimentConfig, out_dir=None, episode_fn: Callable = run_episode,
                     jobs: int = 1) -> Comparison:
    """Run baseline and proposed methods on identical seeds."""
    base = run_experiment(baseline_config(cfg), method="baseline", episode_fn=episode_fn, jobs=jobs)
    prop = run_experiment(proposed_config(cfg), method="proposed", episode_fn=episode_fn, jobs=jobs)
    cmp = Comparison(base, prop)
    if out_dir is not None:
        cmp.write(out_dir)
    return cmp
