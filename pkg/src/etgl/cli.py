"""Command-line entry points for training, evaluation, and experiment sweeps.

Precedence: built-in defaults < config file (--config) < explicit flags.
The effective configuration is echoed into the run's output directory.
"""

import argparse
import csv
import multiprocessing
import os
import sys

import numpy as np

from .agent import evaluate, load_checkpoint, train
from .config import RunConfig, apply_overrides, read_config_file, substream
from .envs import make_env
from .explore import format_report, verify_worst_case_bound

# maps CLI flag destinations onto RunConfig field names
_TRAIN_FLAGS = {
    "env": "env",
    "algo": "algo",
    "explore": "explore",
    "model_source": "model_source",
    "seed": "seed",
    "frames": "total_frames",
    "budget": "budget",
    "epsilon_decay": "epsilon_decay",
    "checkpoint_interval": "checkpoint_interval",
    "warmup": "warmup",
    "out_dir": "out_dir",
}


def _add_train_flags(p):
    p.add_argument("--env", default=None)
    p.add_argument("--algo", default=None)
    p.add_argument("--explore", default=None)
    p.add_argument("--model-source", dest="model_source", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--epsilon-decay", dest="epsilon_decay", type=float, default=None)
    p.add_argument("--checkpoint-interval", dest="checkpoint_interval",
                   type=int, default=None)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--config", default=None, help="key = value overrides file")


def _config_from_args(args):
    cfg = RunConfig()
    if args.config is not None:
        cfg = apply_overrides(cfg, read_config_file(args.config))
    overrides = {}
    for dest, field in _TRAIN_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[field] = str(value)
    if "out_dir" not in overrides and "ETGL_OUT_DIR" in os.environ:
        overrides["out_dir"] = os.environ["ETGL_OUT_DIR"]
    return apply_overrides(cfg, overrides).resolved()


def cmd_train(args):
    cfg = _config_from_args(args)
    result = train(cfg)
    print(f"metrics: {result['metrics']}")
    print(f"checkpoint: {result['checkpoint']}")
    print(f"final coverage: {result['final_coverage']!r}")
    return 0


def cmd_eval(args):
    agent = load_checkpoint(args.checkpoint)
    env = make_env(args.env)
    rng = substream(args.seed, "eval")
    success_rate, mean_return = evaluate(agent, env, args.episodes, rng)
    print(f"success rate: {success_rate!r}")
    print(f"mean return: {mean_return!r}")
    return 0


def _sweep_cell(job):
    """One (strategy, budget, seed) training run; returns its final coverage."""
    env, strategy, budget, seed, frames, out_dir = job
    algo = "et" if strategy == "etgreedy" else "ddpg"
    cfg = RunConfig(env=env, algo=algo, explore=strategy, seed=seed,
                    total_frames=frames, budget=budget,
                    checkpoint_interval=max(frames, 1),
                    out_dir=out_dir).resolved()
    return train(cfg)["final_coverage"]


def cmd_coverage_sweep(args):
    budgets = [int(b) for b in args.budgets.split(",")]
    strategies = args.strategies.split(",")
    seeds = list(range(args.seed, args.seed + args.seeds))
    for s in strategies:
        if s not in ("etgreedy", "ezgreedy", "egreedy"):
            raise ValueError(f"--strategies entries must be etgreedy, "
                             f"ezgreedy, or egreedy, got {s!r}")
    if any(b < 1 for b in budgets):
        raise ValueError("--budgets entries must be positive")
    os.makedirs(args.out_dir, exist_ok=True)
    jobs, cells = [], []
    for strategy in strategies:
        for budget in budgets:
            for seed in seeds:
                run_dir = os.path.join(args.out_dir,
                                       f"{strategy}_n{budget}_s{seed}")
                jobs.append((args.env, strategy, budget, seed,
                             args.frames, run_dir))
                cells.append((strategy, budget, seed))
    if args.jobs > 1 and len(jobs) > 1:
        with multiprocessing.Pool(args.jobs) as pool:
            coverages = pool.map(_sweep_cell, jobs)
    else:
        coverages = [_sweep_cell(j) for j in jobs]
    by_cell = dict(zip(cells, coverages))

    table_path = os.path.join(args.out_dir, "coverage.csv")
    with open(table_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["budget"] + strategies)
        for budget in budgets:
            row = [budget]
            for strategy in strategies:
                vals = [by_cell[(strategy, budget, s)] for s in seeds]
                row.append(repr(float(np.mean(vals))))
            writer.writerow(row)
    with open(os.path.join(args.out_dir, "coverage_runs.csv"), "w",
              newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["strategy", "budget", "seed", "coverage"])
        for (strategy, budget, seed), cov in by_cell.items():
            writer.writerow([strategy, budget, seed, repr(float(cov))])
    print(f"table: {table_path}")
    with open(table_path) as f:
        sys.stdout.write(f.read())
    return 0


def cmd_theorem_check(args):
    sizes = [int(m) for m in args.sizes.split(",")]
    report = verify_worst_case_bound(len(sizes), sizes,
                                     state_action_size=args.state_action_size,
                                     enumerate_chain=not args.no_enumerate)
    print(format_report(report))
    ok = report["chain_dominates_bound"] and report.get(
        "implication_holds", True) and report.get(
        "enumeration_dominates_chain_probability", True)
    return 0 if ok else 1


def cmd_replay_stats(args):
    rows = []
    with open(args.metrics) as f:
        reader = csv.reader(line for line in f if not line.startswith("#"))
        header = next(reader)
        idx = {name: header.index(name)
               for name in ("step", "dbeta_size", "de_size", "success_rate")}
        for row in reader:
            rows.append([row[idx["step"]], row[idx["dbeta_size"]],
                         row[idx["de_size"]], row[idx["success_rate"]]])
    out = args.out or sys.stdout
    close = False
    if isinstance(out, str):
        out, close = open(out, "w", newline=""), True
    writer = csv.writer(out)
    writer.writerow(["step", "dbeta_size", "de_size", "success_rate"])
    writer.writerows(rows)
    if close:
        out.close()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="etgl")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run a training job")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved checkpoint greedily")
    p.add_argument("checkpoint")
    p.add_argument("--env", default="wallmaze")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("coverage-sweep",
                       help="final coverage per (strategy, search budget)")
    p.add_argument("--env", default="wallmaze")
    p.add_argument("--budgets", default="5,10,15,20,25,30,35,40,45,50")
    p.add_argument("--strategies", default="etgreedy,ezgreedy")
    p.add_argument("--frames", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1,
                   help="number of consecutive seeds per cell")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", dest="out_dir", default="sweep")
    p.set_defaults(func=cmd_coverage_sweep)

    p = sub.add_parser("theorem-check",
                       help="verify the option sampling-probability bound")
    p.add_argument("--sizes", default="2,2,2",
                   help="comma-separated bucket sizes (one per tree level)")
    p.add_argument("--state-action-size", type=int, default=None)
    p.add_argument("--no-enumerate", action="store_true")
    p.set_defaults(func=cmd_theorem_check)

    p = sub.add_parser("replay-stats",
                       help="extract buffer sizes and success rate from a metrics CSV")
    p.add_argument("metrics")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_replay_stats)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
