"""Compare the compiled and pure-Python GP kernels.

Times the fused kernel-vector + triangular solve that dominates every
simulated step, for several belief sizes, plus one short planning call.

    python3 benchmarks/bench_kernels.py [--repeat 2000]
"""

import argparse
import time

import numpy as np

from adaptive_pomcp import _gpkernel_py as pure
from adaptive_pomcp.belief import GPBelief, KernelParams
from adaptive_pomcp.environments import Environment
from adaptive_pomcp.pomcp import SearchConfig, plan

try:
    from adaptive_pomcp import _gpkernel as compiled
except ImportError:
    compiled = None


def _belief(m, rng):
    kp = KernelParams(lengthscale=0.5, signal_variance=0.03, noise_variance=3e-6, time_lengthscale=0.05)
    X = np.column_stack([rng.uniform(0, 5, m), rng.uniform(0, 5, m), np.sort(rng.uniform(0, 1, m))])
    y = rng.normal(0, 0.1, m)
    return GPBelief.from_data(kp, ((0, 5), (0, 5), (0, 1)), X, y, time_axis=True)


def time_solve(mod, belief, xs, repeat):
    L, X, w = belief.factor, belief.inputs, belief._w
    inv_ls = belief.kernel.inverse_lengthscales(3, True)
    v = np.empty(belief.size)
    m = belief.size
    s2 = belief.kernel.signal_variance
    t0 = time.perf_counter()
    for i in range(repeat):
        mod.posterior_solve(L, X, w, m, xs[i % len(xs)], inv_ls, s2, v)
    return (time.perf_counter() - t0) / repeat * 1e6


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    xs = [np.array([*rng.uniform(0, 5, 2), rng.uniform(0, 1)]) for _ in range(64)]
    print(f"{'size':>6} {'python us':>10} {'cython us':>10} {'speedup':>8}")
    for m in (10, 50, 100, 200):
        b = _belief(m, rng)
        tp = time_solve(pure, b, xs, args.repeat)
        if compiled is None:
            print(f"{m:>6} {tp:>10.2f} {'n/a':>10}")
            continue
        tc = time_solve(compiled, b, xs, args.repeat)
        print(f"{m:>6} {tp:>10.2f} {tc:>10.2f} {tp / tc:>7.1f}x")

    env = Environment.dynamic(T=100)
    b = GPBelief(KernelParams(0.5, 0.03, 3e-6, 0.05), env.belief_bounds(), True)
    t0 = time.perf_counter()
    plan(b, env, env.start_state(), 500, "ugapeb", SearchConfig(), rng=np.random.default_rng(0))
    print(f"plan(500 simulations, active backend): {time.perf_counter() - t0:.3f} s")


if __name__ == "__main__":
    main()
