"""Command-line interface.

Subcommands: ``optimize``, ``sweep``, ``analytic``, ``deploy``, ``eval``.
Every run is reproducible from the scenario file, the flags and the seed.
Exit codes: 0 success, 1 numerical failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analytic import inverse_transform_deployment, optimal_density, point_density, tradeoff_curve
from .cost import Deployment, EvalConfig, SelectionRule, evaluate
from .errors import NumericalError, UsageError
from .io import (
    deployment_rows,
    deployments_csv,
    parse_scenario,
    read_deployment_csv,
    result_row,
    results_csv,
    results_json,
)
from .lloyd import LloydConfig, optimize
from .sweep import SweepSpec, sweep

DEFAULT_GRID = "0,log:1e-2:1e2:40"


def parse_lambda_grid(spec: str) -> tuple:
    """``0,0.5,log:1e-2:1e2:40,lin:1:2:5`` -> sorted distinct multipliers."""
    values = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 4 or parts[0] not in ("log", "lin"):
                raise UsageError(f"bad lambda-grid item {item!r}; use log:A:B:K or lin:A:B:K")
            try:
                a, b, k = float(parts[1]), float(parts[2]), int(parts[3])
            except ValueError:
                raise UsageError(f"bad lambda-grid item {item!r}") from None
            if k < 1 or (parts[0] == "log" and (a <= 0 or b <= 0)):
                raise UsageError(f"bad lambda-grid item {item!r}")
            values.extend(np.logspace(np.log10(a), np.log10(b), k) if parts[0] == "log" else np.linspace(a, b, k))
        else:
            try:
                values.append(float(item))
            except ValueError:
                raise UsageError(f"bad lambda-grid item {item!r}") from None
    if not values:
        raise UsageError("lambda grid is empty")
    return tuple(sorted(set(float(v) for v in values)))


def _positions(text: str) -> Deployment:
    """``1.2,1.8`` (1-D) or ``0,0;1,1`` (2-D) -> deployment."""
    try:
        rows = [[float(v) for v in chunk.split(",")] for chunk in text.split(";")]
    except ValueError:
        raise UsageError(f"cannot parse positions {text!r}") from None
    if len(rows) == 1:
        return Deployment(np.array(rows[0])[:, None])
    return Deployment(np.array(rows))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavrelay",
        description="Power-optimal aerial relay deployments between ground transmitter and receiver densities.",
        epilog=(
            "Scenario files are JSON with keys dimension, gt_density, gr_density "
            "and optional h (default 0), r (default 2), rho (default 1), n (default 1). "
            "Pass 'ex1' to use the bundled U[0,1] -> U[2,3] example."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, lam=False, mode=True):
        p.add_argument("--scenario", required=True, metavar="PATH", help="scenario JSON file or 'ex1'")
        p.add_argument("--n", type=int, default=None, help="relay count (default: from scenario)")
        if mode:
            p.add_argument("--mode", choices=("centralized", "distributed"), default="centralized")
        if lam:
            p.add_argument("--lambda", dest="lam", type=float, required=True, metavar="F",
                           help="Lagrange multiplier weighting relay power")
        p.add_argument("--out", metavar="PATH", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    def numeric(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=None,
                       help="sample/node count for optimization and evaluation "
                            "(default: 200000 and 262144)")
        p.add_argument("--method", choices=("auto", "quadrature", "monte_carlo"), default="auto",
                       help="integration method (auto: quadrature for d=1, Monte Carlo for d=2)")

    def lloyd(p):
        p.add_argument("--restarts", type=int, default=10)
        p.add_argument("--max-iterations", type=int, default=200)
        p.add_argument("--deployments", metavar="PATH", default=None,
                       help="also write the deployment dump CSV here (csv format)")

    p = sub.add_parser("optimize", help="Lloyd-optimize one deployment")
    common(p, lam=True)
    numeric(p)
    lloyd(p)

    p = sub.add_parser("sweep", help="tradeoff curve over a multiplier grid")
    common(p)
    numeric(p)
    lloyd(p)
    p.add_argument("--lambda-grid", default=DEFAULT_GRID, metavar="SPEC",
                   help=f"comma list of values, log:A:B:K or lin:A:B:K (default {DEFAULT_GRID})")
    p.add_argument("--hull", action="store_true", help="emit only lower-convex-hull points")
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--workers", type=int, default=1, help="threads (only without warm start)")

    p = sub.add_parser("analytic", help="closed-form tradeoff curve (r=2)")
    common(p)
    p.add_argument("--points", type=int, default=101)

    p = sub.add_parser("deploy", help="inverse-transform deployment from the point density (d=1)")
    common(p, lam=True)
    p.add_argument("--resolution", type=int, default=1024)

    p = sub.add_parser("eval", help="evaluate powers of a given deployment")
    common(p, lam=True)
    numeric(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--positions", help="'1.2,1.8' (1-D) or 'x,y;x,y' (2-D)")
    g.add_argument("--deployment", metavar="PATH", help="deployment dump CSV (first run_id)")
    return parser


def _metadata(args) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    return {"version": __version__, "command": args.command, "seed": flags.get("seed"), "flags": flags}


def _emit(args, rows, deployments=None):
    if args.format == "json":
        text = results_json(rows, deployment_rows(deployments) if deployments is not None else None, _metadata(args))
    else:
        text = results_csv(rows)
        dump = getattr(args, "deployments", None)
        if dump and deployments is not None:
            Path(dump).write_text(deployments_csv(deployment_rows(deployments)))
    _write(args.out, text)


def _write(path, text):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _scenario(args):
    s = parse_scenario(args.scenario)
    if args.n is not None:
        if args.n < 1:
            raise UsageError("--n must be >= 1")
        s = dataclasses.replace(s, n=args.n)
    return s


def _configs(args):
    lc = LloydConfig(
        max_iterations=args.max_iterations,
        sample_count=args.samples or LloydConfig.sample_count,
        seed=args.seed,
        restarts=args.restarts,
        method=args.method,
    )
    ec = EvalConfig(method=args.method, sample_count=args.samples or EvalConfig.sample_count, seed=args.seed)
    return lc, ec


def _cmd_optimize(args):
    s = _scenario(args)
    lc, ec = _configs(args)
    res = optimize(s, args.lam, args.mode, lc)
    U = res.deployment
    est = evaluate(U, SelectionRule.for_mode(args.mode, args.lam, U, s), s, ec)
    rows = [result_row(args.mode, s.n, args.lam, est.p_uav, est.p_gt, est.std_error_uav, est.std_error_gt)]
    _emit(args, rows, [(0, U)])


def _cmd_sweep(args):
    s = _scenario(args)
    lc, ec = _configs(args)
    spec = SweepSpec(
        lambda_grid=parse_lambda_grid(args.lambda_grid),
        mode=args.mode,
        lloyd_config=lc,
        eval_config=ec,
        warm_start=not args.no_warm_start,
        workers=args.workers,
    )
    res = sweep(s, spec)
    pts = res.hull_points if args.hull else res.raw_points
    index = {id(p): i for i, p in enumerate(res.raw_points)}
    rows = [result_row(args.mode, s.n, p.lam, p.p_uav, p.p_gt, p.se_uav, p.se_gt) for p in pts]
    _emit(args, rows, [(index[id(p)], p.deployment) for p in pts])


def _cmd_analytic(args):
    s = parse_scenario(args.scenario)
    if s.r != 2:
        raise UsageError("closed-form tradeoffs are available for r=2 only")
    single = args.n == 1
    curve = tradeoff_curve(s.moments(), args.mode, args.points, single=single, h=s.h)
    n_col = 1 if single else float("inf")
    rows = [result_row(args.mode, n_col, p.lam, p.p_uav, p.p_gt) for p in curve.points]
    _emit(args, rows)


def _cmd_deploy(args):
    s = _scenario(args)
    ell = point_density(optimal_density(s, args.lam, args.mode, args.resolution), s.r, s.d, args.resolution)
    U = inverse_transform_deployment(ell, s.n)
    rows = deployment_rows([(0, U)])
    if args.format == "json":
        text = results_json([], rows, _metadata(args))
    else:
        text = deployments_csv(rows)
    _write(args.out, text)


def _cmd_eval(args):
    s = _scenario(args)
    U = _positions(args.positions) if args.positions else read_deployment_csv(args.deployment)
    if args.n is not None and args.n != U.n:
        raise UsageError(f"--n {args.n} does not match {U.n} given positions")
    s = dataclasses.replace(s, n=U.n)
    ec = EvalConfig(method=args.method, sample_count=args.samples or EvalConfig.sample_count, seed=args.seed)
    est = evaluate(U, SelectionRule.for_mode(args.mode, args.lam, U, s), s, ec)
    rows = [result_row(args.mode, U.n, args.lam, est.p_uav, est.p_gt, est.std_error_uav, est.std_error_gt)]
    _emit(args, rows, [(0, U)])


_COMMANDS = {
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
    "analytic": _cmd_analytic,
    "deploy": _cmd_deploy,
    "eval": _cmd_eval,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"uavrelay {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"uavrelay {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
