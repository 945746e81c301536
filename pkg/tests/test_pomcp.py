import numpy as np
import pytest

from adaptive_pomcp.bandit import best_arm
from adaptive_pomcp.belief import GPBelief, KernelParams
from adaptive_pomcp.environments import AgentState, Environment
from adaptive_pomcp.pomcp import (ActNode, ObsNode, SearchConfig, descend, discretize_observation,
                                  most_visited_bin, plan, root_action_stats)

from conftest import corridor, known_belief

EAST = 1


def check_conservation(tree):
    for node in tree.nodes:
        if isinstance(node, ObsNode):
            assert node.N == sum(tree.nodes[c].N for c in node.children.values()) + node.terminations
            for c in node.children.values():
                assert tree.nodes[c].depth == node.depth + 1
        else:
            assert node.N == sum(tree.nodes[c].N for c in node.children.values())
            for c in node.children.values():
                assert tree.nodes[c].depth == node.depth + 1


def dynamic_setup(T=30):
    env = Environment.dynamic(T=T)
    kp = KernelParams(lengthscale=0.5, signal_variance=0.03, noise_variance=3e-6, time_lengthscale=0.05)
    belief = GPBelief(kp, env.belief_bounds(), True).add_observation((2.5, 2.5, 0.0), env.truth((2.5, 2.5), 0.0))
    return env, belief


@pytest.mark.parametrize("explorer", ["uct", "ugapeb", "sr"])
def test_counts_conserved(explorer):
    env, belief = dynamic_setup()
    tree = plan(belief, env, env.start_state(), 300, explorer, rng=np.random.default_rng(1))
    check_conservation(tree)
    root = tree.nodes[tree.root]
    assert root.N == 300
    assert sum(c for c, _, _ in root_action_stats(tree)) == 300
    assert len(root_action_stats(tree)) == 8


@pytest.mark.parametrize("explorer", ["uct", "ugapeb", "sr"])
def test_floor_budget_pulls_each_action_once(explorer):
    env, belief = dynamic_setup()
    tree = plan(belief, env, env.start_state(), 8, explorer, rng=np.random.default_rng(0))
    stats = root_action_stats(tree)
    assert [c for c, _, _ in stats] == [1] * 8
    assert best_arm(tree.level_stats()) == int(np.argmax([m for _, m, _ in stats]))


@pytest.mark.parametrize("explorer", ["uct", "ugapeb", "sr"])
def test_dominant_action_recovered(explorer):
    env = corridor(T=20, length=40.0, start=10.0)
    tree = plan(known_belief(env), env, env.start_state(), 200, explorer, c=0.0, rng=np.random.default_rng(0))
    assert tree.nodes[tree.root].actions[best_arm(tree.level_stats())] == EAST


def test_same_seed_same_tree():
    env, belief = dynamic_setup()
    trees = [plan(belief, env, env.start_state(), 150, "ugapeb", rng=np.random.default_rng(5)) for _ in range(2)]
    assert [n.N for n in trees[0].nodes] == [n.N for n in trees[1].nodes]
    assert trees[0].dumps(3) == trees[1].dumps(3)


def test_means_replay_logged_returns():
    env, belief = dynamic_setup()
    tree = plan(belief, env, env.start_state(), 120, "sr", rng=np.random.default_rng(2), log_returns=True)
    assert len(tree.returns) == 120
    actions = tree.nodes[tree.root].actions
    for a, (count, mean, _) in zip(actions, root_action_stats(tree)):
        rets = [r for act, r in tree.returns if act == a]
        assert len(rets) == count
        assert mean == pytest.approx(np.mean(rets), abs=1e-12)


def test_gamma_zero_keeps_immediate_reward():
    env, belief = dynamic_setup()
    cfg = SearchConfig(gamma=0.0)
    tree = plan(belief, env, env.start_state(), 40, "uct", cfg=cfg, c=10.0,
                rng=np.random.default_rng(0), log_returns=True)
    for a, r in tree.returns:
        pos = env.move(env.start_state().position, a)
        s = belief.posterior(env.gp_point(pos, 1))
        assert r == pytest.approx(s.mean + 10.0 * s.std, abs=1e-12)


def test_two_step_chain():
    env = corridor(T=2, actions=((1.0,),))
    gamma = 0.9
    tree = plan(known_belief(env), env, env.start_state(), 3, "uct", cfg=SearchConfig(gamma=gamma), c=0.0,
                rng=np.random.default_rng(0), log_returns=True)
    for _, r in tree.returns:
        assert r == pytest.approx(6.0 + gamma * 7.0, abs=1e-6)


def test_horizon_cutoff_at_episode_end():
    env = corridor(T=5, actions=((1.0,),))
    tree = plan(known_belief(env), env, AgentState((9.0,), 4), 3, "uct", c=0.0,
                rng=np.random.default_rng(0), log_returns=True)
    assert [r for _, r in tree.returns] == pytest.approx([10.0] * 3, abs=1e-6)


def test_descend():
    env, belief = dynamic_setup()
    tree = plan(belief, env, env.start_state(), 200, "uct", rng=np.random.default_rng(3))
    root = tree.nodes[tree.root]
    a = root.actions[best_arm(tree.level_stats())]
    act = tree.nodes[root.children[a]]
    o = most_visited_bin(tree, a)
    assert tree.nodes[act.children[o]].N == max(tree.nodes[c].N for c in act.children.values())
    assert tree.nodes[descend(tree, a, o)].depth == root.depth + 2
    assert descend(tree, a, 10 ** 6) is None


def test_unexpanded_action():
    env = corridor(T=10)
    tree = plan(known_belief(env), env, env.start_state(), 1, "uct", rng=np.random.default_rng(0))
    assert descend(tree, EAST, 0) is None
    assert most_visited_bin(tree, EAST) is None


def test_monotone_budget_on_deterministic_instance():
    env = corridor(T=50, length=50.0, start=25.0)
    belief = known_belief(env)
    K = 2
    rates = []
    for n in (K, 4 * K, 16 * K):
        hits = 0
        for seed in range(50):
            tree = plan(belief, env, env.start_state(), n, "uct", c=0.0, rng=np.random.default_rng(seed))
            hits += tree.nodes[tree.root].actions[best_arm(tree.level_stats())] == EAST
        rates.append(hits / 50)
    assert rates == sorted(rates)
    assert rates[-1] == 1.0


@pytest.mark.parametrize("value,width,expected", [(0.0, 0.1, 0), (0.25, 0.1, 2), (-0.05, 0.1, -1)])
def test_discretize(value, width, expected):
    assert discretize_observation(value, width) == expected


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(gamma=1.5)
    with pytest.raises(ValueError):
        SearchConfig(max_depth=0)
    with pytest.raises(ValueError):
        SearchConfig(obs_bin_width=0.0)
    assert SearchConfig().bin_width(Environment.dynamic()) == pytest.approx(0.1)


def test_node_kinds():
    assert ObsNode.kind == "observation" and ActNode.kind == "action"
