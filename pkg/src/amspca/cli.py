"""Command-line driver: ``amspca solve | variance-sweep | bench-strategies``.

Exit codes: 0 success, 2 input or usage error, 3 every run degenerate.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import formulations as fm
from .matrix import MatrixFormatError, center_columns, load_matrix, mult, set_threads
from .multistart import MultiStartPlan, run_multistart, sweep_stats
from .solver import SolverConfig, Status

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
DEFAULT_BATCH = 16


class InputError(Exception):
    pass


def _add_campaign_args(p):
    p.add_argument("--input", required=True, help="matrix file (.mtx or .csv)")
    p.add_argument("--format", choices=["matrix-market", "csv"], default=None)
    p.add_argument("--header", action="store_true", help="skip the first CSV row")
    p.add_argument("--center", action="store_true", help="center columns before solving")
    p.add_argument("--variance", choices=["l1", "l2"], default="l2")
    p.add_argument("--sparsity", choices=["l0", "l1"], default="l0")
    p.add_argument("--mode", choices=["constraint", "penalty"], default="constraint")
    p.add_argument("--starts", type=int, default=1, help="number of starting points l")
    p.add_argument("--strategy", choices=["nai", "sfa", "bat", "otf"], default="otf")
    p.add_argument("--batch", type=int, default=None, help="batch width r for bat/otf (default min(starts, 16))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--scheme", choices=["gaussian-sphere", "column"], default="gaussian-sphere")
    p.add_argument("--output", default="-", help="output path ('-' for stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="amspca", description="Sparse PCA by alternating maximization.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one multi-start campaign, write a JSON report")
    _add_campaign_args(solve)
    solve.add_argument("--s", type=float, default=None, help="sparsity budget (constraint mode)")
    solve.add_argument("--gamma", type=float, default=None, help="penalty weight (penalty mode)")

    sweep = sub.add_parser("variance-sweep", help="per-start explained variance over a parameter grid (CSV)")
    _add_campaign_args(sweep)
    grid = sweep.add_mutually_exclusive_group(required=True)
    grid.add_argument("--s-grid", help="comma-separated s values, or 'pow2' for 1,2,4,..,p")
    grid.add_argument("--gamma-grid", help="comma-separated gamma values")

    bench = sub.add_parser("bench-strategies", help="compare scheduling strategies on one campaign (CSV)")
    _add_campaign_args(bench)
    bench.add_argument("--s", type=float, default=None)
    bench.add_argument("--gamma", type=float, default=None)
    bench.add_argument(
        "--strategies",
        default="nai,sfa,bat,otf",
        help="comma list; bat/otf take --batch unless written like bat16, otf64",
    )
    return parser


def _formulation(args, param, p):
    """Validated formulation for the parsed flags; integer-valued s becomes an int."""
    if args.mode == "constraint":
        if param is None:
            raise InputError("constraint mode needs --s")
        if not 1 <= param <= p:
            raise InputError(f"s must be in [1, p] (p={p})")
        if float(param).is_integer():
            param = int(param)
        elif args.sparsity == "l0":
            raise InputError("s must be an integer for the l0 constraint")
        return fm.Formulation(args.variance, args.sparsity, "constraint", s=param)
    if param is None:
        raise InputError("penalty mode needs --gamma")
    if not param >= 0:
        raise InputError("gamma must be nonnegative")
    return fm.Formulation(args.variance, args.sparsity, "penalty", gamma=param)


def _load(args):
    try:
        A = load_matrix(args.input, args.format, header=args.header)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror or exc}") from None
    except (MatrixFormatError, ValueError) as exc:
        raise InputError(f"{args.input}: {exc}") from None
    if args.center:
        A = center_columns(A)
    return A


def _plan(strategy, l, r, seed, scheme):
    strategy = strategy.upper()
    if strategy in ("NAI", "SFA"):
        r = None
    elif r is None:
        r = min(l, DEFAULT_BATCH)
    try:
        return MultiStartPlan(l=l, strategy=strategy, r=r, seed=seed, scheme=scheme)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _config(args):
    try:
        return SolverConfig(max_iterations=args.max_iterations, tol=args.tol, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _fmt(x):
    return f"{x:.17e}"


def _open_out(path, newline=None):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline=newline), True


def build_report(form, A, report):
    """JSON-ready dict for one campaign (everything except wall time is deterministic)."""
    best = report.best
    x = best.loading
    nz = np.flatnonzero(x)
    out = {
        "formulation": form.describe(),
        "n": A.n,
        "p": A.p,
        "best": {
            "start_index": best.start_index,
            "status": best.status,
            "iterations": best.iterations,
            "objective": best.objective,
            "l0_norm": int(nz.size),
            "loading": [[int(i), float(x[i])] for i in nz],
        },
        "per_start": {
            "objective": [r.objective for r in report.all_results],
            "iterations": [r.iterations for r in report.all_results],
            "status": [r.status for r in report.all_results],
        },
        "strategy": report.plan.label,
        "starts": report.plan.l,
        "batch": report.plan.r,
        "seed": report.plan.seed,
        "total_sweeps": report.total_sweeps,
        "column_iterations": report.column_iterations,
        "wall_time": report.wall_time,
    }
    if form.variance == "L2" and A.frobenius_norm_sq > 0:
        u = mult(A, x)
        out["best"]["explained_variance_ratio"] = float(u @ u) / A.frobenius_norm_sq
    return out


def _all_degenerate(report):
    return all(r.status == Status.DEGENERATE for r in report.all_results)


def cmd_solve(args):
    A = _load(args)
    form = _formulation(args, args.s if args.mode == "constraint" else args.gamma, A.p)
    plan = _plan(args.strategy, args.starts, args.batch, args.seed, args.scheme)
    report = run_multistart(form, A, plan, _config(args))
    doc = build_report(form, A, report)
    fh, close = _open_out(args.output)
    try:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    if _all_degenerate(report):
        print("error: every run degenerated (A x = 0)", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _parse_grid(text, p=None):
    if text.strip().lower() == "pow2":
        vals, s = [], 1
        while s < p:
            vals.append(s)
            s *= 2
        vals.append(p)
        return vals
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"bad grid {text!r}") from None
    if not vals:
        raise InputError("grid is empty")
    return vals


def cmd_variance_sweep(args):
    A = _load(args)
    if args.mode == "constraint":
        if args.s_grid is None:
            raise InputError("constraint mode needs --s-grid")
        grid = _parse_grid(args.s_grid, A.p)
    else:
        if args.gamma_grid is None:
            raise InputError("penalty mode needs --gamma-grid")
        grid = _parse_grid(args.gamma_grid)
    plan = _plan(args.strategy, args.starts, args.batch, args.seed, args.scheme)
    cfg = _config(args)
    forms = [_formulation(args, val, A.p) for val in grid]

    name = "s" if args.mode == "constraint" else "gamma"
    fh, close = _open_out(args.output, newline="")
    degenerate = True
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([name, "start_index", "objective", "best_objective", "fraction_of_best", "iterations", "status"])
        for form in forms:
            report = run_multistart(form, A, plan, cfg)
            degenerate = degenerate and _all_degenerate(report)
            best = report.best.objective
            for res in report.all_results:
                frac = res.objective / best if best > 0 else float("nan")
                w.writerow([_fmt(form.param), res.start_index, _fmt(res.objective), _fmt(best), _fmt(frac), res.iterations, res.status])
    finally:
        if close:
            fh.close()
    return EXIT_DEGENERATE if degenerate else EXIT_OK


def _parse_strategies(text, default_r):
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        name, digits = tok[:3], tok[3:]
        if name not in ("nai", "sfa", "bat", "otf"):
            raise InputError(f"unknown strategy {tok!r}")
        r = int(digits) if digits else (default_r if name in ("bat", "otf") else None)
        if digits and name in ("nai", "sfa"):
            raise InputError(f"{name} takes no batch width")
        out.append((name, r))
    if not out:
        raise InputError("empty strategy list")
    return out


def cmd_bench_strategies(args):
    A = _load(args)
    form = _formulation(args, args.s if args.mode == "constraint" else args.gamma, A.p)
    cfg = _config(args)
    plans = [_plan(name, args.starts, r, args.seed, args.scheme) for name, r in _parse_strategies(args.strategies, args.batch)]
    nai = run_multistart(form, A, _plan("nai", args.starts, None, args.seed, args.scheme), cfg)
    reports = [nai if plan.strategy == "NAI" else run_multistart(form, A, plan, cfg) for plan in plans]

    fh, close = _open_out(args.output, newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strategy", "r", "total_sweeps", "column_iterations", "mean_iterations", "wall_time", "speedup_vs_nai", "best_objective"])
        for plan, rep in zip(plans, reports):
            st = sweep_stats(rep, baseline=nai)
            w.writerow([plan.strategy.lower(), plan.r, rep.total_sweeps, rep.column_iterations, _fmt(st["mean_iterations"]),
                        _fmt(rep.wall_time), _fmt(st["speedup"]), _fmt(rep.best.objective)])
    finally:
        if close:
            fh.close()
    return EXIT_DEGENERATE if all(_all_degenerate(r) for r in reports) else EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "variance-sweep": cmd_variance_sweep,
    "bench-strategies": cmd_bench_strategies,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    set_threads()
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
