"""Command-line entry point: ``sureloss {check,gen,formulate,solve,bench}``.

Exit codes: 0 for success (or "avoids sure loss" from ``check``), 1 when
``check`` finds sure loss, 2 for any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .bench import BenchDisagreement, BenchPlan, emit_plots, run_grid
from .checker import Formulation, Method, MethodChoice, avoids_sure_loss
from .core import GambleSet
from .errors import SureLossError
from .gen import generate_instance
from .lp import (
    Kind,
    StandardLp,
    build_d3,
    build_d4_phase1,
    build_p3,
    build_p4prime,
    default_start,
    make_layout,
    FormulationMeta,
    select_omega0,
)
from .lpio import dump_lp, load_lp
from .solvers import SolverOptions, primal_dual, revised_simplex, two_phase_simplex

EXIT_OK, EXIT_SURE_LOSS, EXIT_ERROR = 0, 1, 2


def _options(args: argparse.Namespace) -> SolverOptions:
    kwargs = {}
    if getattr(args, "max_iters", None):
        kwargs["max_iters"] = args.max_iters
    return SolverOptions(**kwargs)


def _load_gambles(path: str) -> GambleSet:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    data = json.loads(text)
    return GambleSet.from_dict(data)


def cmd_check(args: argparse.Namespace) -> int:
    d = _load_gambles(args.file)
    choice = MethodChoice(Method(args.method), Formulation(args.formulation), _options(args))
    verdict = avoids_sure_loss(d, choice, fast_path=not args.no_fast_path)
    out = {"method": choice.method.value, "formulation": choice.formulation.value, **verdict.to_dict()}
    print(json.dumps(out, indent=2))
    return EXIT_OK if verdict.avoids else EXIT_SURE_LOSS


def cmd_gen(args: argparse.Namespace) -> int:
    d = generate_instance(args.seed, args.gambles, args.outcomes, args.truth,
                          k=args.k, delta=args.delta, bias=args.bias)
    spec = {"n_outcomes": args.outcomes, "n_gambles": args.gambles, "k_previsions": args.k,
            "delta": args.delta, "bias": args.bias}
    doc = {"header": {"seed": args.seed, "spec": spec, "ground_truth": args.truth}, **d.to_dict()}
    text = json.dumps(doc, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_formulate(args: argparse.Namespace) -> int:
    d = _load_gambles(args.file)
    omega0 = select_omega0(d) if args.omega0 is None else args.omega0
    kind = args.formulation
    if kind == "P3":
        lp = build_p3(d, omega0)
    elif kind == "D3":
        lp = build_d3(d, omega0)
    elif kind == "D4Prime":
        lp = build_d4_phase1(d, omega0)[0]
    else:
        lp = build_p4prime(build_d4_phase1(d, omega0)[0])
    sys.stdout.write(dump_lp(lp))
    return EXIT_OK


def split_free(lp: StandardLp) -> tuple[StandardLp, list[int]]:
    """Replace each free column ``x_j`` by ``x_j+ - x_j-`` (new columns appended)."""
    free = list(lp.meta.free_columns)
    if not free:
        return lp, free
    A = np.hstack([lp.A, -lp.A[:, free]])
    c = np.concatenate([lp.c, -lp.c[free]])
    meta = FormulationMeta(Kind.GENERIC, None, make_layout([("x", lp.n), ("x_neg", len(free))]))
    return StandardLp(A, lp.b, c, meta), free


def cmd_solve(args: argparse.Namespace) -> int:
    original = load_lp(args.file)
    lp, free = split_free(original)
    opts = _options(args)
    if args.method == "simplex":
        basis = lp.meta.initial_basis if not free else None
        out = revised_simplex(lp, basis, opts) if basis is not None else two_phase_simplex(lp, opts)
    else:
        out = primal_dual(lp, default_start(lp), opts)
    summary = out.summary()
    if out.x is not None:
        x = out.x[: original.n].copy()
        if free:
            x[free] -= out.x[original.n:]
        summary["x"] = x.tolist()
    if out.y is not None:
        summary["y"] = out.y.tolist()
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    overrides = {"seed": args.seed}
    if args.reps:
        overrides["reps"] = args.reps
    if args.max_exp:
        overrides["i_range"] = range(1, args.max_exp + 1)
        overrides["j_range"] = range(1, args.max_exp + 1)
    if args.truth:
        overrides["truth"] = args.truth
    plan = BenchPlan.preset(args.preset, **overrides)
    out = Path(args.out)
    try:
        summary = run_grid(plan, out, workers=args.workers)
    except BenchDisagreement as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    errors = sum(row["errors"] for row in summary)
    print(f"wrote {out / 'records.csv'} and {out / 'summary.csv'} ({len(summary)} cells, {errors} solver errors)")
    if not args.no_plots:
        files = emit_plots(out / "records.csv", out / "plots")
        print(f"wrote {len(files)} plots to {out / 'plots'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sureloss", description="Check whether sets of gambles avoid sure loss.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide whether a gamble set avoids sure loss")
    p.add_argument("file", help="gamble set JSON ('-' for stdin)")
    p.add_argument("--method", choices=[m.value for m in Method], default="simplex")
    p.add_argument("--formulation", choices=[f.value for f in Formulation], default="P3")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--no-fast-path", action="store_true", help="always run the solver")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate a random gamble set with known ground truth")
    p.add_argument("--outcomes", type=int, required=True)
    p.add_argument("--gambles", type=int, required=True)
    p.add_argument("--truth", choices=["asl", "not_asl"], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k", type=int, default=32, help="previsions in the credal set")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--bias", choices=["none", "uniform", "constant"], default="none")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("formulate", help="write the LP for a gamble set in dump format")
    p.add_argument("file")
    p.add_argument("--formulation", choices=["P3", "D3", "D4Prime", "P4Prime"], default="P3")
    p.add_argument("--omega0", type=int)
    p.set_defaults(func=cmd_formulate)

    p = sub.add_parser("solve", help="solve an LP dump (debugging aid)")
    p.add_argument("file")
    p.add_argument("--method", choices=["simplex", "primal-dual"], default="simplex")
    p.add_argument("--max-iters", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run the timing grid")
    p.add_argument("--preset", choices=["desk", "full"], default="desk")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int)
    p.add_argument("--max-exp", type=int, help="use exponents 1..N for both axes")
    p.add_argument("--truth", choices=["asl", "not_asl", "both"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (SureLossError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
