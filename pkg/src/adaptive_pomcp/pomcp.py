"""POMCP search with a GP belief as the generative model.

The root's first action is chosen by a configurable explorer (UCT,
UGapEb or Successive Rejects); every deeper layer uses UCT. Simulated
observations are drawn from the simulation's own copy of the belief and
absorbed into it, so deeper rewards reflect what earlier simulated
samples would have taught the agent.

Random draw order per simulation step: one standard normal for the
observation; per rollout step additionally one integer for the action,
drawn before the normal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bandit import (ArmStats, ExplorationConfig, Finished, SuccessiveRejectsState,
                     sr_next, ugapeb_select, uct_select)
from .belief import GPBelief, ScratchBelief
from .environments import AgentState, Environment

EXPLORERS = ("uct", "ugapeb", "sr")
B_FLOOR = 1e-6


@dataclass(frozen=True)
class SearchConfig:
    gamma: float = 0.95
    max_depth: int = 10
    obs_bin_width: Optional[float] = None  # None: 0.1 x the environment's value range
    rollout_policy_seed: int = 0
    h_eps: Optional[float] = None  # None: adaptive hardness estimate

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")
        if self.obs_bin_width is not None and not self.obs_bin_width > 0:
            raise ValueError("obs_bin_width must be positive")

    def bin_width(self, env: Environment) -> float:
        if self.obs_bin_width is not None:
            return self.obs_bin_width
        return 0.1 * env.value_range if env.value_range > 0 else 0.1


class ReturnRange:
    """Highest and lowest discounted return seen; ``b`` is their spread."""

    __slots__ = ("lo", "hi")

    def __init__(self):
        self.lo = math.inf
        self.hi = -math.inf

    def update(self, value: float) -> None:
        if value < self.lo:
            self.lo = value
        if value > self.hi:
            self.hi = value

    @property
    def b(self) -> float:
        spread = self.hi - self.lo
        return spread if spread > B_FLOOR else B_FLOOR


def discretize_observation(value: float, bin_width: float) -> int:
    return math.floor(value / bin_width)


class ObsNode:
    """History node: children are action nodes keyed by action id."""

    __slots__ = ("id", "depth", "actions", "children", "N", "terminations")

    def __init__(self, id_, depth, actions):
        self.id = id_
        self.depth = depth
        self.actions = actions
        self.children = {}
        self.N = 0
        self.terminations = 0

    kind = "observation"


class ActNode:
    """Action node: return statistics plus observation children keyed by bin."""

    __slots__ = ("id", "depth", "action", "stats", "children")

    def __init__(self, id_, depth, action):
        self.id = id_
        self.depth = depth
        self.action = action
        self.stats = ArmStats()
        self.children = {}

    kind = "action"

    @property
    def N(self):
        return self.stats.count


class SearchTree:
    """Arena of alternating observation/action nodes; ``nodes[root]`` is the root.

    ``depth`` counts layers, so an action node sits one below its parent
    and the observation node after one action/observation pair sits at 2.
    """

    def __init__(self, root_actions):
        self.nodes = []
        self.root = self._new_obs(0, tuple(root_actions))
        self.b = B_FLOOR
        self.n_rollouts = 0
        self.returns = []  # (root action, discounted return) per simulation

    def _new_obs(self, depth, actions):
        node = ObsNode(len(self.nodes), depth, actions)
        self.nodes.append(node)
        return node.id

    def _new_act(self, depth, action):
        node = ActNode(len(self.nodes), depth, action)
        self.nodes.append(node)
        return node.id

    def level_stats(self, node_id=None) -> list:
        """ArmStats of an observation node's actions, in its action order."""
        node = self.nodes[self.root if node_id is None else node_id]
        out = []
        for a in node.actions:
            cid = node.children.get(a)
            out.append(self.nodes[cid].stats if cid is not None else ArmStats())
        return out

    def dump(self, max_depth: int = 2) -> dict:
        """Nested ``{action, N, mean, children}`` summary for debugging."""
        def obs(node_id, depth):
            node = self.nodes[node_id]
            out = []
            for a, cid in sorted(node.children.items()):
                act = self.nodes[cid]
                entry = {"action": a, "N": act.stats.count, "mean": act.stats.mean}
                if depth + 1 < max_depth:
                    entry["children"] = {str(o): obs(oid, depth + 1) for o, oid in sorted(act.children.items())}
                out.append(entry)
            return out
        return {"N": self.nodes[self.root].N, "actions": obs(self.root, 0)}

    def dumps(self, max_depth: int = 2) -> str:
        return json.dumps(self.dump(max_depth))


def root_action_stats(tree: SearchTree) -> list:
    """``(count, mean, m2)`` for every legal root action, in action order."""
    return [(s.count, s.mean, s.m2) for s in tree.level_stats()]


def descend(tree: SearchTree, action: int, obs_bin: int, node_id: Optional[int] = None) -> Optional[int]:
    """Observation child reached by ``action`` then ``obs_bin``, or None."""
    node = tree.nodes[tree.root if node_id is None else node_id]
    aid = node.children.get(action)
    if aid is None:
        return None
    return tree.nodes[aid].children.get(obs_bin)


def most_visited_bin(tree: SearchTree, action: int, node_id: Optional[int] = None) -> Optional[int]:
    """Bin of the most visited observation child under ``action`` (ties: lower bin)."""
    node = tree.nodes[tree.root if node_id is None else node_id]
    aid = node.children.get(action)
    if aid is None:
        return None
    children = tree.nodes[aid].children
    if not children:
        return None
    return min(children, key=lambda o: (-tree.nodes[children[o]].N, o))


class SimState:
    """Simulation-local agent position, step index and belief."""

    __slots__ = ("belief", "position", "step")

    def __init__(self, belief: ScratchBelief, position, step):
        self.belief = belief
        self.position = position
        self.step = step


class RootExplorer:
    """Chooses the first action of every simulation."""

    def __init__(self, kind: str, K: int, n_rollouts: int, h_eps: Optional[float] = None):
        if kind not in EXPLORERS:
            raise ValueError(f"unknown explorer {kind!r}; choose from {EXPLORERS}")
        self.kind = kind
        self.K = K
        self.n = n_rollouts
        self.h_eps = h_eps
        self.pulls = 0
        self.sr = None
        if kind == "sr" and K >= 2:
            self.sr = SuccessiveRejectsState.start(K, max(n_rollouts, K))

    def select(self, arms, parent_count: int, b: float) -> int:
        for i, a in enumerate(arms):
            if a.count == 0:
                return i
        if self.K == 1:
            return 0
        if self.kind == "uct":
            return uct_select(arms, parent_count, b)
        if self.kind == "ugapeb":
            cfg = ExplorationConfig(max(self.n, self.K), b=b, h_eps=self.h_eps)
            return ugapeb_select(arms, cfg, self.pulls)
        nxt = sr_next(self.sr, arms)
        return nxt.best if isinstance(nxt, Finished) else nxt

    def record(self, i: int) -> None:
        self.pulls += 1
        if self.sr is not None:
            self.sr.record(i)


class Planner:
    """One planning call: builds a tree with a fixed number of simulations."""

    def __init__(self, env: Environment, c: float, cfg: SearchConfig,
                 rng: np.random.Generator, returns: Optional[ReturnRange] = None):
        self.env = env
        self.c = c
        self.cfg = cfg
        self.rng = rng
        self.returns = returns if returns is not None else ReturnRange()
        self.bin_width = cfg.bin_width(env)
        self.horizon = cfg.max_depth
        self._root_action = None

    # generative model -------------------------------------------------
    def _generate(self, sim: SimState, action: int):
        env = self.env
        pos = env.move(sim.position, action)
        step = sim.step + 1
        x = env.gp_point(pos, step)
        mean, std = sim.belief.query(x)
        reward = mean + self.c * std
        obs = mean + std * self.rng.standard_normal()
        sim.belief.absorb(x, obs)
        sim.position = pos
        sim.step = step
        return reward, obs

    def rollout(self, sim: SimState, depth: int) -> float:
        """Uniformly random legal actions until the horizon; no tree nodes."""
        total, disc = 0.0, 1.0
        gamma = self.cfg.gamma
        env = self.env
        while depth < self.horizon:
            acts = env.legal_actions(sim.position)
            a = acts[int(self.rng.integers(len(acts)))]
            r, _ = self._generate(sim, a)
            total += disc * r
            disc *= gamma
            depth += 1
        return total

    def simulate(self, tree: SearchTree, node_id: int, sim: SimState, depth: int,
                 explorer: Optional[RootExplorer] = None) -> float:
        node = tree.nodes[node_id]
        if depth >= self.horizon:
            node.N += 1
            node.terminations += 1
            return 0.0
        if node.N == 0 and explorer is None:
            node.N += 1
            node.terminations += 1
            return self.rollout(sim, depth)
        arms = tree.level_stats(node_id)
        b = self.returns.b
        if explorer is not None:
            idx = explorer.select(arms, node.N, b)
            explorer.record(idx)
            self._root_action = node.actions[idx]
        else:
            idx = uct_select(arms, node.N, b)
        action = node.actions[idx]
        aid = node.children.get(action)
        if aid is None:
            aid = tree._new_act(node.depth + 1, action)
            node.children[action] = aid
        act = tree.nodes[aid]
        reward, obs = self._generate(sim, action)
        o = math.floor(obs / self.bin_width)
        cid = act.children.get(o)
        if cid is None:
            cid = tree._new_obs(act.depth + 1, self.env.legal_actions(sim.position))
            act.children[o] = cid
        ret = reward + self.cfg.gamma * self.simulate(tree, cid, sim, depth + 1)
        node.N += 1
        act.stats.add(ret)
        return ret

    def plan(self, belief: GPBelief, state: AgentState, n_rollouts: int,
             explorer: str = "uct", log_returns: bool = False) -> SearchTree:
        env = self.env
        actions = env.legal_actions(state.position)
        tree = SearchTree(actions)
        self.horizon = max(1, min(self.cfg.max_depth, env.T - state.step_index))
        root_explorer = RootExplorer(explorer, len(actions), n_rollouts, self.cfg.h_eps)
        scratch = belief.scratch(self.horizon + 1)
        sim = SimState(scratch, state.position, state.step_index)
        root = tree.root
        for _ in range(n_rollouts):
            scratch.reset()
            sim.position = state.position
            sim.step = state.step_index
            ret = self.simulate(tree, root, sim, 0, root_explorer)
            self.returns.update(ret)
            if log_returns:
                tree.returns.append((self._root_action, ret))
        tree.b = self.returns.b
        tree.n_rollouts = n_rollouts
        return tree


def plan(belief: GPBelief, env: Environment, state: AgentState, n_rollouts: int,
         explorer: str = "uct", cfg: SearchConfig = SearchConfig(), c: float = 10.0,
         rng: Optional[np.random.Generator] = None,
         returns: Optional[ReturnRange] = None, log_returns: bool = False) -> SearchTree:
    """Run ``n_rollouts`` simulations from ``state`` and return the tree."""
    if rng is None:
        rng = np.random.default_rng(cfg.rollout_policy_seed)
    return Planner(env, c, cfg, rng, returns).plan(belief, state, n_rollouts, explorer, log_returns)
