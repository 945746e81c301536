"""Command-line entry point: run, grid-search, compare, gen-dataset, export-truth."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .allocation import build_schedule
from .config import ConfigError, load_config
from .environments import DatasetError, GroundTruth, export_truth_slices, generate_dataset
from .harness import compare_baseline, grid_search, initial_belief, run_experiment
from .pomcp import Planner


def _seeds(text: str) -> tuple:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adaptive-pomcp", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one configuration over several seeds")
    run.add_argument("--config", required=True)
    run.add_argument("--seeds", type=_seeds, default=None, help="e.g. 0,1,2,3,4 (default: from config)")
    run.add_argument("--out", default="results")
    run.add_argument("--jobs", type=int, default=1, help="parallel episodes")
    run.add_argument("--dump-tree", type=int, metavar="DEPTH", default=None,
                     help="print the first planning tree as JSON, limited to DEPTH levels, and exit")

    gs = sub.add_parser("grid-search", help="rank the 7x7 beta allocation curves")
    gs.add_argument("--config", required=True)
    gs.add_argument("--out", default="grid_search.csv")
    gs.add_argument("--jobs", type=int, default=1)

    cmp = sub.add_parser("compare", help="baseline vs proposed method on identical seeds")
    cmp.add_argument("--config", required=True)
    cmp.add_argument("--out", default="comparison")
    cmp.add_argument("--jobs", type=int, default=1)

    gd = sub.add_parser("gen-dataset", help="write a synthetic x,y,z,value survey grid")
    gd.add_argument("--out", required=True)
    gd.add_argument("--seed", type=int, default=0)

    ex = sub.add_parser("export-truth", help="write ground-truth samples above a threshold")
    ex.add_argument("--threshold", type=float, required=True)
    ex.add_argument("--out", required=True)
    ex.add_argument("--config", default=None, help="take the world from this config (default: dynamic)")
    ex.add_argument("--resolution", type=float, default=0.1)
    return p


def _dump_tree(cfg, depth: int) -> None:
    env = cfg.environment.build(cfg.T)
    seed = cfg.seeds[0]
    planner = Planner(env, cfg.objective_weight, cfg.search, np.random.default_rng(seed))
    start = env.start_state()
    n = build_schedule(cfg.curve, cfg.total_budget, cfg.T, len(env.motion.displacements))[0]
    tree = planner.plan(initial_belief(cfg, env), start, n, cfg.explorer)
    print(json.dumps(tree.dump(depth), indent=1))


def _cmd_run(args) -> None:
    cfg = load_config(args.config)
    if args.dump_tree is not None:
        _dump_tree(cfg, args.dump_tree)
        return
    summary = run_experiment(cfg, seeds=args.seeds, out_dir=args.out, jobs=args.jobs)
    print(f"{summary.method}: reward {summary.mean_reward:.4f} +/- {summary.std_reward:.4f}, "
          f"rollouts {summary.mean_rollouts:.1f}, wall {summary.total_wall_ms / 1e3:.2f} s -> {args.out}")


def _cmd_grid(args) -> None:
    cfg = load_config(args.config)
    ranked = grid_search(cfg, out_path=args.out, jobs=args.jobs)
    for i, (curve, reward) in enumerate(ranked[:10], 1):
        print(f"{i:2d}  {curve.label():<16} {reward:.4f}")
    print(f"full ranking -> {args.out}")


def _cmd_compare(args) -> None:
    cfg = load_config(args.config)
    cmp = compare_baseline(cfg, out_dir=args.out, jobs=args.jobs)
    for s in (cmp.baseline, cmp.proposed):
        print(f"{s.method:<9} reward {s.mean_reward:.4f} +/- {s.std_reward:.4f}  "
              f"rollouts {s.mean_rollouts:.1f}  wall {s.total_wall_ms / 1e3:.2f} s")
    print(f"rollout ratio {cmp.rollout_ratio:.3f}, wall ratio {cmp.wall_ratio:.3f} -> {args.out}")


def _cmd_gen(args) -> None:
    n = generate_dataset(args.out, seed=args.seed)
    print(f"wrote {n} rows to {args.out}")


def _cmd_export(args) -> None:
    if args.config:
        truth = load_config(args.config).environment.build(1).truth
    else:
        truth = GroundTruth.dynamic()
    n = export_truth_slices(truth, args.threshold, args.out, resolution=args.resolution)
    print(f"wrote {n} rows to {args.out}")


COMMANDS = {"run": _cmd_run, "grid-search": _cmd_grid, "compare": _cmd_compare,
            "gen-dataset": _cmd_gen, "export-truth": _cmd_export}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigError, DatasetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
