"""Command-line interface.

Three subcommands share one model-file format (see :mod:`exitsim.model`):

    exitsim simulate --model m.json --method ssa|exit [--epsilon F]
                     --samples N --seed S [--bins B] [--out DIR] [--workers W]
    exitsim compare  --model m.json --epsilon F --samples N --seed S ...
    exitsim converge --model m.json --epsilons F,F,... --samples N --seed S ...

``simulate`` runs one ensemble of N trajectories and writes its exit-time
histogram. ``compare`` runs SSA on the given seed and the exit-time method
on seed+1, then writes the per-bin error and a summary row. ``converge``
measures the grouping error against a common-random-number SSA reference
for each epsilon; there N is the number of exited trajectories to collect
(exits can be rare, so sizing by raw trajectory count would make the sample
size unpredictable).

Exit codes: 0 success, 2 usage error, 3 model validation error,
4 runtime error (e.g. every trajectory censored).
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import harness
from .model import ModelError, load_model

USAGE_ERROR = 2
MODEL_ERROR = 3
RUNTIME_ERROR = 4


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, (int, str)) else _fmt(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--samples", type=int, required=True,
                   help="ensemble size (converge: exited trajectories to collect)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--bins", type=int, default=200)
    p.add_argument("--out", default=".", help="output directory for CSVs")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exitsim",
        description="Exit-time ensembles for stochastic reaction systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="one ensemble, one histogram")
    _add_common(p_sim)
    p_sim.add_argument("--method", choices=("ssa", "exit"), required=True)
    p_sim.add_argument("--epsilon", type=float, default=None,
                       help="grouping tolerance (required with --method exit)")

    p_cmp = sub.add_parser("compare", help="SSA vs exit-time method")
    _add_common(p_cmp)
    p_cmp.add_argument("--epsilon", type=float, required=True)

    p_cnv = sub.add_parser("converge", help="error versus epsilon")
    _add_common(p_cnv)
    p_cnv.add_argument("--epsilons", required=True,
                       help="comma-separated tolerances, e.g. 0.5,0.25,0.125")
    return parser


def _validate_common(parser, args) -> None:
    if args.samples < 1:
        parser.error(f"--samples must be >= 1, got {args.samples}")
    if args.bins < 10:
        parser.error(f"--bins must be >= 10, got {args.bins}")
    if args.workers < 1:
        parser.error(f"--workers must be >= 1, got {args.workers}")


def cmd_simulate(args, model) -> int:
    system, initial, exit_cond = model
    hist = harness.run_ensemble(
        system, initial, exit_cond, args.method, args.samples, args.seed,
        epsilon=args.epsilon or 0.0, bins=args.bins, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "histogram.csv", ["t_mid", "density"],
               zip(hist.midpoints, hist.densities))
    c = hist.rng_counters
    _write_csv(out / "summary.csv",
               ["method", "epsilon", "seed", "n_exited", "n_censored",
                "uniform_draws", "exponential_draws", "gamma_draws"],
               [[args.method, args.epsilon or 0.0, args.seed, hist.n_exited,
                 hist.n_censored, c["uniform"], c["exponential"], c["gamma"]]])
    return 0


def cmd_compare(args, model) -> int:
    system, initial, exit_cond = model
    t0 = time.perf_counter()
    res = harness.compare_ensembles(
        system, initial, exit_cond, args.epsilon, args.samples, args.seed,
        bins=args.bins, workers=args.workers)
    wall = time.perf_counter() - t0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "comparison.csv",
               ["t_mid", "density_ssa", "density_method", "abs_error"],
               zip(res.ssa.midpoints, res.ssa.densities,
                   res.method.densities, res.per_bin))
    _write_csv(out / "summary.csv",
               ["epsilon", "l1", "l2", "rho", "n_exited", "n_censored",
                "gamma_draws", "exp_draws", "wall_seconds"],
               [[args.epsilon, res.l1, res.l2, res.rho, res.method.n_exited,
                 res.method.n_censored, res.method.rng_counters["gamma"],
                 res.ssa.rng_counters["exponential"], wall]])
    print(f"l1={res.l1:.6g} l2={res.l2:.6g} rho={res.rho:.6g} "
          f"ks={res.ks_statistic:.6g} (critical {res.ks_critical:.6g}, "
          f"equivalent={res.ks_equivalent})")
    return 0


def cmd_converge(args, model) -> int:
    try:
        epsilons = [float(tok) for tok in args.epsilons.split(",") if tok]
    except ValueError:
        print(f"error: --epsilons is not a comma-separated float list: "
              f"{args.epsilons!r}", file=sys.stderr)
        return USAGE_ERROR
    if not epsilons or any(e < 0 for e in epsilons):
        print(f"error: --epsilons must be nonnegative, got {args.epsilons!r}",
              file=sys.stderr)
        return USAGE_ERROR
    system, initial, exit_cond = model
    t0 = time.perf_counter()
    records = harness.convergence_study(
        system, initial, exit_cond, epsilons, target_exits=args.samples,
        seed=args.seed, bins=args.bins, workers=args.workers)
    wall = time.perf_counter() - t0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "convergence.csv",
               ["epsilon", "l1", "l2", "rho", "n_exited", "n_censored",
                "gamma_draws", "exp_draws", "wall_seconds"],
               [[r.epsilon, r.l1_error, r.l2_error, r.rho, r.n_samples,
                 r.n_censored, r.gamma_draws, r.exponential_draws, wall]
                for r in records])
    for prev, cur in zip(records, records[1:]):
        if prev.l1_error > 0 and cur.l1_error > 0:
            order = np.log2(prev.l1_error / cur.l1_error) \
                / np.log2(prev.epsilon / cur.epsilon) if cur.epsilon else float("nan")
            print(f"eps {prev.epsilon:g} -> {cur.epsilon:g}: "
                  f"l1 {prev.l1_error:.4g} -> {cur.l1_error:.4g} "
                  f"(order {order:.2f})")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_common(parser, args)
    if args.command == "simulate":
        if args.method == "exit" and args.epsilon is None:
            parser.error("--epsilon is required with --method exit")
        if args.method == "ssa" and args.epsilon is not None:
            parser.error("--epsilon only applies to --method exit")
        if args.epsilon is not None and args.epsilon < 0:
            parser.error(f"--epsilon must be >= 0, got {args.epsilon}")
    if args.command == "compare" and args.epsilon < 0:
        parser.error(f"--epsilon must be >= 0, got {args.epsilon}")

    try:
        model = load_model(args.model)
    except FileNotFoundError as exc:
        print(f"error: model file not found: {exc.filename}", file=sys.stderr)
        return MODEL_ERROR
    except ModelError as exc:
        print(f"error: invalid model: {exc}", file=sys.stderr)
        return MODEL_ERROR

    try:
        if args.command == "simulate":
            return cmd_simulate(args, model)
        if args.command == "compare":
            return cmd_compare(args, model)
        return cmd_converge(args, model)
    except harness.AllCensoredError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
