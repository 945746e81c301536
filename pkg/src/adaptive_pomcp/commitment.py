"""How many actions to take from one search tree before replanning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .bandit import ExplorationConfig, best_arm, ugapec_confident, welch_p, welch_t
from .pomcp import SearchTree, descend, most_visited_bin

KINDS = ("single", "fixed_k", "welch", "ugapec")


@dataclass(frozen=True)
class CommitmentPolicy:
    kind: str = "single"
    k: int = 1
    p_threshold: float = 0.05
    delta: float = 0.05
    epsilon: float = 0.0
    max_commit: int = 5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown commitment kind {self.kind!r}; choose from {KINDS}")
        if self.k < 1:
            raise ValueError("k must be positive")
        if not 0.0 < self.p_threshold < 1.0:
            raise ValueError("p_threshold must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.max_commit < 1:
            raise ValueError("max_commit must be positive")

    @property
    def cap(self) -> int:
        if self.kind == "single":
            return 1
        if self.kind == "fixed_k":
            return min(self.k, self.max_commit)
        return self.max_commit


@dataclass(frozen=True)
class CommittedPlan:
    actions: tuple
    levels_tested: int
    stop_reason: str  # first-action-default | test-failed | missing-branch | cap-reached
    bins: tuple = ()  # observation bin assumed between consecutive actions


def welch_commit_check(stats, p_threshold: float) -> bool:
    """Welch test between the two best-looking arms with at least two samples."""
    testable = [s for s in stats if s.count >= 2]
    if len(testable) < 2:
        return False
    testable.sort(key=lambda s: -s.mean)
    t, v = welch_t(testable[0], testable[1])
    return welch_p(t, v) < p_threshold


def ugapec_commit_check(stats, delta: float, epsilon: float, b: float) -> bool:
    if len(stats) < 2 or any(s.count < 1 for s in stats):
        return False
    return ugapec_confident(stats, ExplorationConfig(sum(s.count for s in stats), b=b,
                                                     delta=delta, epsilon=epsilon))


def _passes(policy: CommitmentPolicy, stats, b: float) -> bool:
    if policy.kind == "fixed_k":
        return True
    if policy.kind == "welch":
        return welch_commit_check(stats, policy.p_threshold)
    return ugapec_commit_check(stats, policy.delta, policy.epsilon, b)


def extract_plan(tree: SearchTree, policy: CommitmentPolicy, limit: Optional[int] = None) -> CommittedPlan:
    """Commit the root's best action, then keep going down while the test passes.

    ``limit`` additionally caps the plan length (e.g. steps left in the episode).
    """
    cap = policy.cap if limit is None else max(1, min(policy.cap, limit))
    node_id = tree.root
    stats = tree.level_stats(node_id)
    actions = [tree.nodes[node_id].actions[best_arm(stats)]]
    bins = []
    if policy.kind == "single":
        return CommittedPlan(tuple(actions), 0, "first-action-default")
    tested = 0

    def level_ok(level_stats):
        nonlocal tested
        if policy.kind == "fixed_k":
            return True
        tested += 1
        return _passes(policy, level_stats, tree.b)

    if len(actions) >= cap:
        return CommittedPlan(tuple(actions), 0, "cap-reached")
    if not level_ok(stats):
        return CommittedPlan(tuple(actions), tested, "test-failed")
    while True:
        o = most_visited_bin(tree, actions[-1], node_id)
        child = descend(tree, actions[-1], o, node_id) if o is not None else None
        if child is None:
            reason = "missing-branch"
            break
        stats = tree.level_stats(child)
        if not any(s.count for s in stats):
            reason = "missing-branch"
            break
        if not level_ok(stats):
            reason = "test-failed"
            break
        node_id = child
        actions.append(tree.nodes[node_id].actions[best_arm(stats)])
        bins.append(o)
        if len(actions) >= cap:
            reason = "cap-reached"
            break
    return CommittedPlan(tuple(actions), tested, reason, tuple(bins))
