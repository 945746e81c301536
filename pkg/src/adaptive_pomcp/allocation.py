"""Per-step rollout schedules from an episode-wide budget."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .special import betainc

GRID_VALUES = (0.75, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0)


@dataclass(frozen=True)
class AllocationCurve:
    kind: str = "fixed"
    alpha: float = 1.0
    beta_param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("fixed", "beta"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.kind == "beta" and not (self.alpha > 0 and self.beta_param > 0):
            raise ValueError("beta curve needs alpha > 0 and beta_param > 0")

    @classmethod
    def beta(cls, alpha: float, beta_param: float) -> "AllocationCurve":
        return cls("beta", float(alpha), float(beta_param))

    def label(self) -> str:
        return "fixed" if self.kind == "fixed" else f"beta({self.alpha:g},{self.beta_param:g})"


@dataclass(frozen=True)
class RolloutSchedule:
    per_step: tuple
    nominal_budget: int
    floor: int
    pre_clamp: tuple

    @property
    def total(self) -> int:
        return sum(self.per_step)

    def __len__(self):
        return len(self.per_step)

    def __getitem__(self, i):
        return self.per_step[i]


def beta_cdf(x: float, alpha: float, beta_param: float) -> float:
    """Cumulative Beta(alpha, beta) distribution, i.e. ``I_x(alpha, beta)``."""
    return betainc(x, alpha, beta_param)


def _largest_remainder(raw, total):
    floors = [math.floor(r) for r in raw]
    short = total - sum(floors)
    # ties go to later steps
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - floors[i]), -i))
    for i in order[:short]:
        floors[i] += 1
    return floors


def build_schedule(curve: AllocationCurve, B: int, T: int, A_min: int = 1) -> RolloutSchedule:
    """Split ``B`` rollouts over ``T`` steps, then raise every step to ``A_min``.

    The rounded split sums to ``B`` exactly; the floor may push the realized
    total above ``B``.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if A_min < 1:
        raise ValueError("A_min must be >= 1")
    if B < T:
        raise ValueError(f"budget {B} cannot give every one of {T} steps a rollout")
    if curve.kind == "fixed":
        base, rem = divmod(B, T)
        rounded = [base + (1 if i >= T - rem else 0) for i in range(T)]
    else:
        cdf = [beta_cdf(i / T, curve.alpha, curve.beta_param) for i in range(T + 1)]
        raw = [B * (cdf[i + 1] - cdf[i]) for i in range(T)]
        rounded = _largest_remainder(raw, B)
    clamped = tuple(max(r, A_min) for r in rounded)
    return RolloutSchedule(clamped, B, A_min, tuple(rounded))


def grid_candidates() -> list:
    """The 7 x 7 grid of beta curves, alpha outer, beta inner."""
    return [AllocationCurve.beta(a, b) for a in GRID_VALUES for b in GRID_VALUES]
