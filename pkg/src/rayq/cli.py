"""Command line entry point.

Subcommands: gen (write a problem instance to disk), run (seeded
experiment), repro (figure reproduction), bench (time-to-target table),
ingest (validate an external trace CSV).

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import RayqError, SchemaMismatch, UnknownFigure
from .harness import (
    ExperimentConfig,
    bench_to_target,
    ingest_external_trace,
    parse_solver,
    reproduce_figure,
    run_experiment,
)
from .matio import write_matrices_binary, write_matrix_text
from .problems import FAMILIES, ProblemSpec, generate


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rayq",
                                     description="generalized Rayleigh quotient benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a problem instance and write it to disk")
    gen.add_argument("--family", required=True, choices=FAMILIES)
    gen.add_argument("--dim", type=int, default=100)
    gen.add_argument("--q", type=int, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--format", choices=("text", "binary"), default="text")

    run = sub.add_parser("run", help="run a seeded multi-trial experiment")
    run.add_argument("--config", default=None, help="JSON experiment config")
    run.add_argument("--family", choices=FAMILIES, default=None)
    run.add_argument("--dim", type=int, default=None)
    run.add_argument("--q", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--iters", type=int, default=None)
    run.add_argument("--solver", action="append", default=None,
                     help="repeatable, e.g. szo:m=100 or zorga:variant=armijo")
    run.add_argument("--target-rqe", type=float, default=None)
    run.add_argument("--out", default=None)

    repro = sub.add_parser("repro", help="reproduce a figure")
    repro.add_argument("figure", help="fig2 .. fig7")
    repro.add_argument("--scale", choices=("desk", "full"), default="desk")
    repro.add_argument("--seed", type=int, default=0)
    repro.add_argument("--out", default="figures")

    bench = sub.add_parser("bench", help="median wall time to reach a target accuracy")
    bench.add_argument("--family", choices=FAMILIES, default="ill_conditioned")
    bench.add_argument("--dims", type=int, nargs="+", default=[50, 100])
    bench.add_argument("--m", type=int, nargs="+", default=[1, 100])
    bench.add_argument("--q", type=int, default=1)
    bench.add_argument("--target-rqe", type=float, default=0.01)
    bench.add_argument("--trials", type=int, default=10)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", required=True)

    ingest = sub.add_parser("ingest", help="validate an externally produced trace CSV")
    ingest.add_argument("path")
    return parser


def _cmd_gen(args) -> int:
    spec = ProblemSpec(family=args.family, dim=args.dim, q=args.q, seed=args.seed)
    out = generate(spec)
    a, b = (out.a, out.b) if hasattr(out, "a") else out
    path = Path(args.out)
    if args.format == "binary":
        write_matrices_binary(path, [a, b])
    else:
        write_matrix_text(path.with_suffix(".a.txt"), a)
        write_matrix_text(path.with_suffix(".b.txt"), b)
    print(f"wrote {args.family} d={args.dim} seed={args.seed}")
    return 0


def _cmd_run(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    else:
        if args.family is None or args.solver is None:
            print("run: need either --config or --family plus --solver", file=sys.stderr)
            return 1
        cfg = ExperimentConfig(
            problem=ProblemSpec(family=args.family, dim=args.dim or 100, q=args.q,
                                seed=args.seed or 0),
            solvers=[parse_solver(s) for s in args.solver],
        )
    if args.family is not None and args.config:
        cfg.problem = ProblemSpec(family=args.family, dim=args.dim or cfg.problem.dim,
                                  q=args.q, seed=args.seed or cfg.problem.seed)
    if args.trials is not None:
        cfg.trials = args.trials
    if args.iters is not None:
        cfg.max_iters = args.iters
    if args.seed is not None:
        cfg.base_seed = args.seed
    if args.solver is not None and args.config:
        cfg.solvers = [parse_solver(s) for s in args.solver]
    if args.target_rqe is not None:
        cfg.target_rqe = args.target_rqe
    if args.out is not None:
        cfg.out_dir = args.out
    run_experiment(cfg)
    print(f"wrote experiment outputs to {cfg.out_dir}")
    return 0


def _cmd_repro(args) -> int:
    out = reproduce_figure(args.figure, scale=args.scale, out_dir=args.out,
                           base_seed=args.seed)
    print(f"wrote figure artifacts to {out}")
    return 0


def _cmd_bench(args) -> int:
    bench_to_target(args.family, args.dims, args.m, target_rqe=args.target_rqe,
                    trials=args.trials, q=args.q, base_seed=args.seed,
                    out_path=args.out)
    print(f"wrote benchmark table to {args.out}")
    return 0


def _cmd_ingest(args) -> int:
    traces = ingest_external_trace(args.path)
    rows = sum(len(tr.k) for tr in traces.values())
    print(f"ok: {len(traces)} trial(s), {rows} row(s)")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    handlers = {"gen": _cmd_gen, "run": _cmd_run, "repro": _cmd_repro,
                "bench": _cmd_bench, "ingest": _cmd_ingest}
    try:
        return handlers[args.command](args)
    except (ValueError, UnknownFigure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SchemaMismatch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RayqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
