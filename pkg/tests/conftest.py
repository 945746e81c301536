import numpy as np
import pytest

from adaptive_pomcp.belief import GPBelief, KernelParams
from adaptive_pomcp.environments import Environment, GroundTruth, MotionModel, Workspace

ACCEPTANCE_LINES = {}


def corridor(T=5, actions=((-1.0,), (1.0,)), length=20.0, start=5.0):
    """1-D corridor whose truth equals the position (east is always better)."""
    kp = KernelParams(lengthscale=2.0, signal_variance=100.0)
    xs = np.arange(0.0, length + 1.0, 2.0)
    truth_gp = GPBelief.from_data(kp, ((0.0, length),), xs[:, None], xs)
    truth = GroundTruth("interpolated-grid", truth_gp, (0.0, length))
    ws = Workspace(((0.0, length),), 1.0, T)
    return Environment(truth, ws, MotionModel(tuple(actions), 1.0), (start,), time_axis=False)


def known_belief(env, lengthscale=1.0):
    """Belief that already knows the corridor exactly at every integer cell."""
    kp = KernelParams(lengthscale=lengthscale, signal_variance=100.0)
    lo, hi = env.workspace.spatial_bounds[0]
    xs = np.arange(lo, hi + 0.5, 1.0)
    return GPBelief.from_data(kp, env.workspace.spatial_bounds, xs[:, None], xs)


@pytest.fixture
def corridor_env():
    return corridor()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
