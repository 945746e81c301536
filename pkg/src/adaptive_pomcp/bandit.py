"""Bandit machinery for the root of the search tree.

Cumulative-reward exploration (UCT), fixed-budget best-arm identification
(UGapEb, Successive Rejects), the fixed-confidence UGapEc stopping check,
and the two-sample Welch t-test used for plan commitment.

Ties are broken by fewer pulls, then lower index, everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .special import student_t_sf2


class InsufficientSamplesError(ValueError):
    pass


class ArmStats:
    """Running count, mean and sum of squared deviations (Welford)."""

    __slots__ = ("count", "mean", "m2")

    def __init__(self, count: int = 0, mean: float = 0.0, m2: float = 0.0):
        self.count = count
        self.mean = mean
        self.m2 = m2

    @classmethod
    def from_samples(cls, samples) -> "ArmStats":
        s = cls()
        for x in samples:
            s.add(x)
        return s

    @classmethod
    def from_moments(cls, count: int, mean: float, variance: float) -> "ArmStats":
        """Stats with a given sample variance (``m2 = variance * (count - 1)``)."""
        return cls(count, mean, variance * max(count - 1, 0))

    def add(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    @property
    def variance(self) -> float:
        """Sample variance; ``nan`` below two samples."""
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    def copy(self) -> "ArmStats":
        return ArmStats(self.count, self.mean, self.m2)

    def __eq__(self, other):
        return (isinstance(other, ArmStats) and self.count == other.count
                and self.mean == other.mean and self.m2 == other.m2)

    def __repr__(self):
        return f"ArmStats(count={self.count}, mean={self.mean:.6g}, m2={self.m2:.6g})"


def update(stats: ArmStats, sample: float) -> ArmStats:
    """Return a new ArmStats that includes ``sample``."""
    out = stats.copy()
    out.add(sample)
    return out


@dataclass
class ExplorationConfig:
    """Parameters of the fixed-budget / fixed-confidence algorithms.

    ``h_eps=None`` selects the adaptive hardness estimate.
    """

    budget_n: int
    b: float = 1.0
    h_eps: Optional[float] = None
    delta: float = 0.05
    epsilon: float = 0.0

    def __post_init__(self):
        if self.budget_n < 1:
            raise ValueError("budget_n must be positive")
        if not self.b > 0:
            raise ValueError("b must be positive")
        if self.h_eps is not None and not self.h_eps > 0:
            raise ValueError("h_eps must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")


def _unpulled_first(arms: Sequence[ArmStats]) -> Optional[int]:
    for i, a in enumerate(arms):
        if a.count == 0:
            return i
    return None


def best_arm(arms: Sequence[ArmStats]) -> int:
    """Index of the highest mean among pulled arms (0 if none are pulled)."""
    if not arms:
        raise ValueError("no arms")
    best, best_mean = 0, -math.inf
    for i, a in enumerate(arms):
        if a.count > 0 and a.mean > best_mean:
            best, best_mean = i, a.mean
    return best


def uct_select(arms: Sequence[ArmStats], parent_count: int, b: float) -> int:
    """Unvisited arm first, else argmax of ``mean + b * sqrt(ln(parent) / count)``."""
    if not arms:
        raise ValueError("no arms")
    i0 = _unpulled_first(arms)
    if i0 is not None:
        return i0
    log_n = math.log(max(parent_count, 1))
    best, best_score, best_count = 0, -math.inf, 0
    for i, a in enumerate(arms):
        score = a.mean + b * math.sqrt(log_n / a.count)
        if score > best_score or (score == best_score and a.count < best_count):
            best, best_score, best_count = i, score, a.count
    return best


def hardness(arms: Sequence[ArmStats], b: float, eps_floor: Optional[float] = None) -> float:
    """Plug-in estimate of the UGapE hardness ``sum_i (b / max(gap_i, floor))^2``.

    Gaps are empirical: best vs. runner-up for the best arm, best vs. arm
    otherwise. The ``b^2`` factor keeps the estimate scale-free.
    """
    if eps_floor is None:
        eps_floor = 0.01 * b
    means = [a.mean for a in arms]
    order = sorted(range(len(means)), key=lambda i: -means[i])
    top = means[order[0]]
    second = means[order[1]] if len(order) > 1 else top
    h = 0.0
    for i, m in enumerate(means):
        gap = top - second if i == order[0] else top - m
        h += (b / max(gap, eps_floor)) ** 2
    return h


def _gap_indices(arms, beta):
    # B_i = max_{j != i} U_j - L_i, computed with the top-two upper bounds
    upper = [a.mean + h for a, h in zip(arms, beta)]
    j1 = max(range(len(arms)), key=lambda j: upper[j])
    u1 = upper[j1]
    u2 = max((upper[j] for j in range(len(arms)) if j != j1), default=-math.inf)
    gaps = [(u2 if i == j1 else u1) - (a.mean - h) for i, (a, h) in enumerate(zip(arms, beta))]
    return gaps, upper


def _prefer(arms, beta, i, j):
    """Of two candidates, the one with the wider half-width (then fewer pulls, lower index)."""
    ki = (-beta[i], arms[i].count, i)
    kj = (-beta[j], arms[j].count, j)
    return i if ki <= kj else j


def ugapeb_select(arms: Sequence[ArmStats], cfg: ExplorationConfig, pulls_so_far: int = 0) -> int:
    """Next arm under the UGapE fixed-budget rule.

    Half-widths are ``b * sqrt(a / N_i)`` with exploration rate
    ``a = (budget_n - K) / H``.
    """
    K = len(arms)
    if K == 0:
        raise ValueError("no arms")
    if K == 1:
        return 0
    if any(a.count == 0 for a in arms):
        raise InsufficientSamplesError("UGapEb needs every arm pulled once")
    h = cfg.h_eps if cfg.h_eps is not None else hardness(arms, cfg.b)
    rate = max(cfg.budget_n - K, 0) / h
    beta = [cfg.b * math.sqrt(rate / a.count) for a in arms]
    gaps, upper = _gap_indices(arms, beta)
    J = min(range(K), key=lambda i: (gaps[i], arms[i].count, i))
    u = max((j for j in range(K) if j != J), key=lambda j: (upper[j], -arms[j].count, -j))
    return _prefer(arms, beta, J, u)


def ugapec_half_widths(arms: Sequence[ArmStats], b: float, delta: float) -> list:
    K = len(arms)
    return [b * math.sqrt(math.log(4.0 * K * a.count ** 3 / delta) / (2.0 * a.count)) for a in arms]


def ugapec_confident(arms: Sequence[ArmStats], cfg: ExplorationConfig) -> bool:
    """True iff the UGapE fixed-confidence rule would stop: ``B_best <= epsilon``."""
    if len(arms) < 2:
        raise ValueError("need at least two arms")
    if any(a.count == 0 for a in arms):
        raise InsufficientSamplesError("UGapEc needs every arm pulled once")
    beta = ugapec_half_widths(arms, cfg.b, cfg.delta)
    gaps, _ = _gap_indices(arms, beta)
    return gaps[best_arm(arms)] <= cfg.epsilon


def sr_log_bar(K: int) -> float:
    return 0.5 + sum(1.0 / i for i in range(2, K + 1))


def sr_schedule(K: int, n: int) -> list:
    """Cumulative per-arm pull targets ``n_1..n_{K-1}`` of Successive Rejects."""
    if K < 2:
        raise ValueError("Successive Rejects needs at least two arms")
    if n < K:
        raise ValueError(f"budget {n} is smaller than the number of arms {K}")
    lb = sr_log_bar(K)
    return [math.ceil((n - K) / (lb * (K + 1 - k))) for k in range(1, K)]


def sr_total(targets: Sequence[int], K: int) -> int:
    """Pulls implied by a schedule: surviving arms are pulled up to each phase target."""
    total, prev = 0, 0
    for k, t in enumerate(targets):
        total += (K - k) * (t - prev)
        prev = t
    return total


@dataclass
class SuccessiveRejectsState:
    """Progress of one Successive Rejects run over ``K`` arms."""

    K: int
    targets: list
    survivors: list = field(default_factory=list)
    phase: int = 0
    pulls: list = field(default_factory=list)

    @classmethod
    def start(cls, K: int, n: int) -> "SuccessiveRejectsState":
        return cls(K, sr_schedule(K, n), list(range(K)), 0, [0] * K)

    @property
    def finished(self) -> bool:
        return len(self.survivors) == 1

    def record(self, arm: int) -> None:
        """Count one pull of ``arm`` (issued by :func:`sr_next` or forced elsewhere)."""
        self.pulls[arm] += 1


@dataclass(frozen=True)
class Finished:
    best: int


def sr_next(state: SuccessiveRejectsState, arms: Sequence[ArmStats]):
    """Next arm to pull, or :class:`Finished` once one arm survives.

    Mutates ``state`` as phases end. Pulls are counted by the caller via
    :meth:`SuccessiveRejectsState.record`.
    """
    while not state.finished:
        # every arm is pulled once before anything is rejected (only binds when n == K)
        target = max(state.targets[state.phase], 1)
        pending = [i for i in state.survivors if state.pulls[i] < target]
        if pending:
            return min(pending, key=lambda i: (state.pulls[i], i))
        # reject the lowest mean; ties reject the higher index
        worst = min(state.survivors, key=lambda i: (arms[i].mean, -i))
        state.survivors.remove(worst)
        state.phase += 1
    return Finished(state.survivors[0])


def welch_t(a: ArmStats, b: ArmStats) -> tuple:
    """Welch statistic ``t`` and Welch-Satterthwaite degrees of freedom ``v``."""
    if a.count < 2 or b.count < 2:
        raise InsufficientSamplesError("Welch test needs at least two samples per arm")
    va = a.variance / a.count
    vb = b.variance / b.count
    se2 = va + vb
    diff = a.mean - b.mean
    if se2 == 0.0:
        if diff == 0.0:
            return 0.0, math.inf
        return math.copysign(math.inf, diff), math.inf
    t = diff / math.sqrt(se2)
    v = se2 * se2 / (va * va / (a.count - 1) + vb * vb / (b.count - 1))
    return t, v


def welch_p(t: float, v: float) -> float:
    """Two-tailed p-value of ``t`` under a Student-t with ``v`` degrees of freedom."""
    return student_t_sf2(t, v)
