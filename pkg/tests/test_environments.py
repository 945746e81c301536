import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptive_pomcp.belief import DomainError, KernelParams
from adaptive_pomcp.environments import (AgentState, DatasetError, Environment, GroundTruth, IllegalActionError,
                                         MotionModel, Workspace, dynamic_function, dynamic_function_grid,
                                         env_step, export_truth_slices, generate_dataset, load_grid_dataset,
                                         neighbors)


def write_rows(path, rows, header=("x", "y", "z", "value")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


class TestDynamicFunction:
    @pytest.mark.parametrize("t", [0.0, 1.0])
    def test_peak(self, t):
        assert dynamic_function(2, 3.5, t) == pytest.approx(1.0, abs=1e-12)

    def test_center_value(self):
        assert dynamic_function(2, 2, 0) == pytest.approx(math.exp(-(1.5 / 0.7) ** 2), rel=1e-12)
        assert dynamic_function(2, 2, 0) == pytest.approx(0.01014, abs=1e-5)

    @given(st.floats(0, 5), st.floats(0, 5), st.floats(0, 11 / 12))
    @settings(max_examples=200)
    def test_period(self, x, y, t):
        assert abs(dynamic_function(x, y, t) - dynamic_function(x, y, t + 1 / 12)) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            dynamic_function(-0.1, 1, 0)
        with pytest.raises(DomainError):
            dynamic_function(1, 1, 1.5)

    def test_grid_matches_scalar(self):
        rng = np.random.default_rng(0)
        x, y, t = rng.uniform(0, 5, 50), rng.uniform(0, 5, 50), rng.uniform(0, 1, 50)
        np.testing.assert_allclose(dynamic_function_grid(x, y, t),
                                   [dynamic_function(*p) for p in zip(x, y, t)], rtol=1e-14)


class TestNeighbors:
    def test_interior_and_corner(self):
        env = Environment.dynamic()
        assert len(env.legal_actions((2.5, 2.5))) == 8
        assert len(neighbors(AgentState((0.0, 0.0)), env.workspace, env.motion)) == 3
        assert len(env.legal_actions((0.0, 2.5))) == 5

    def test_dataset_surface(self, tmp_path):
        path = tmp_path / "d.csv"
        generate_dataset(path, seed=0)
        env = Environment.grid_dataset(path, T=10)
        start = env.start_state()
        assert start.position[2] == 0.0
        acts = env.legal_actions(start.position)
        assert len(acts) == 9
        assert all(env.motion.displacements[a][2] >= 0 for a in acts)

    def test_compass_step_length(self):
        for d in MotionModel.compass3d(3.0).displacements:
            assert math.hypot(*d) == pytest.approx(3.0)


class TestEnvStep:
    def test_onto_peak(self):
        # with T=12, step 1 is t=1/12: the bump is back at (2, 3.5)
        env = Environment.dynamic(T=12)
        a = env.motion.displacements.index((0.0, 0.25))
        new, value = env_step(env, AgentState((2.0, 3.25), 0), a)
        assert new.step_index == 1
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_illegal(self):
        env = Environment.dynamic()
        with pytest.raises(IllegalActionError):
            env_step(env, AgentState((0.0, 0.0)), 0)

    def test_seeded_noise(self):
        env = Environment.dynamic(T=20, noise_std=0.1)
        s = AgentState((2.5, 2.5))
        _, v1 = env_step(env, s, 0, np.random.default_rng(7))
        _, v2 = env_step(env, s, 0, np.random.default_rng(7))
        draw = np.random.default_rng(7).standard_normal()
        truth = env.truth(env.move(s.position, 0), 1 / 20)
        assert v1 == v2 == pytest.approx(truth + 0.1 * draw, abs=1e-15)


class TestDataset:
    def test_single_row(self, tmp_path):
        p = write_rows(tmp_path / "one.csv", [(1.0, 2.0, 3.0, 4.5)])
        gt = load_grid_dataset(p, KernelParams(lengthscale=5.0))
        assert gt((1.0, 2.0, 3.0), 0.0) == pytest.approx(4.5, abs=1e-6)

    def test_empty(self, tmp_path):
        p = write_rows(tmp_path / "none.csv", [])
        with pytest.raises(DatasetError):
            load_grid_dataset(p, KernelParams())

    @pytest.mark.parametrize("rows,header", [
        ([(1, 2, "x", 4)], ("x", "y", "z", "value")),
        ([(1, 2, 3)], ("x", "y", "z", "value")),
        ([(1, 2, 3, 4)], ("a", "b", "c", "d")),
    ])
    def test_malformed(self, tmp_path, rows, header):
        p = write_rows(tmp_path / "bad.csv", rows, header)
        with pytest.raises(DatasetError):
            load_grid_dataset(p, KernelParams())

    def test_four_points_centroid(self, tmp_path):
        rows = [(0, 0, 0, 1.0), (4, 0, 0, 2.0), (0, 4, 0, 3.0), (0, 0, 4, 4.0)]
        p = write_rows(tmp_path / "four.csv", rows)
        kp = KernelParams(lengthscale=3.0, signal_variance=2.0)
        gt = load_grid_dataset(p, kp)
        X = np.array([r[:3] for r in rows], float)
        y = np.array([r[3] for r in rows])
        K = np.array([[kp(a, b) for b in X] for a in X])
        c = X.mean(axis=0)
        k = np.array([kp(a, c) for a in X])
        assert gt(tuple(c), 0.0) == pytest.approx(k @ np.linalg.solve(K, y), abs=1e-9)

    def test_generated_dataset_round_trip(self, tmp_path):
        n = generate_dataset(tmp_path / "g.csv", seed=3)
        assert n == 576
        gt = load_grid_dataset(tmp_path / "g.csv", KernelParams(lengthscale=25.0, signal_variance=4.0))
        with open(tmp_path / "g.csv") as fh:
            rows = list(csv.DictReader(fh))
        for r in rows[::97]:
            assert gt((float(r["x"]), float(r["y"]), float(r["z"])), 0) == pytest.approx(float(r["value"]), abs=1e-6)


class TestExport:
    def test_thresholds(self, tmp_path):
        gt = GroundTruth.dynamic()
        assert export_truth_slices(gt, 1.1, tmp_path / "a.csv", resolution=0.5, time_steps=13) == 0
        full = export_truth_slices(gt, 0.0, tmp_path / "b.csv", resolution=0.5, time_steps=13)
        assert full == 11 * 11 * 13
        n = export_truth_slices(gt, 0.6, tmp_path / "c.csv", resolution=0.25, time_steps=25)
        brute = sum(dynamic_function(i * 0.25, j * 0.25, k / 24) >= 0.6
                    for i in range(21) for j in range(21) for k in range(25))
        assert n == brute > 0
        with open(tmp_path / "c.csv") as fh:
            assert fh.readline().strip() == "x,y,t,value"

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            export_truth_slices(GroundTruth.dynamic(), 0.5, tmp_path / "missing" / "x.csv", resolution=1.0)


def test_workspace_validation():
    with pytest.raises(ValueError):
        Workspace(((1.0, 0.0),), 0.25, 10)
