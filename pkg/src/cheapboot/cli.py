"""Command-line interface: run one cell, reproduce the tables, sweep eta,
or run the quick invariant selftest.

Flags override values from an optional JSON config file (--config), which in
turn overrides built-in defaults. The config file mirrors ExperimentConfig
field names; the CLI flag --seed maps to master_seed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .defaults import default_eta
from .errors import CheapbootError
from .harness import (
    METHODS,
    ExperimentConfig,
    emit_report,
    run_cell,
    sensitivity_sweep,
    table_configs,
)
from .problems import SIGMA_KINDS

# reproduction-grid choices, used when --B is not given
_DEFAULT_B = {"cofb_asgd": 10, "cofb_sgd": 10, "conb": 3, "online_bootstrap": 100}
_DEFAULT_ETA_GRID = "0.2,0.3,0.4,0.5,0.6,0.7"


def _add_cell_flags(sp: argparse.ArgumentParser, need_method: bool) -> None:
    sp.add_argument("--problem", choices=("linear", "logistic"), default=None)
    if need_method:
        sp.add_argument("--method", choices=METHODS, default=None, required=False)
    sp.add_argument("--d", type=int, default=None, help="problem dimension (default 5)")
    sp.add_argument("--n", type=int, default=None, help="sample size (default 10000)")
    sp.add_argument("--sigma", choices=SIGMA_KINDS, default=None)
    sp.add_argument("--eta", type=float, default=None,
                    help="initial step size (default: pinned per-cell value)")
    sp.add_argument("--alpha", type=float, default=None,
                    help="step decay exponent (default 0.501; 1.0 for cofb_sgd)")
    sp.add_argument("--B", type=int, default=None,
                    help="replicate/thread count (defaults per method: "
                         "cofb 10, conb 3, online_bootstrap 100)")
    sp.add_argument("--level", type=float, default=None, help="nominal coverage (default 0.95)")
    sp.add_argument("--trials", type=int, default=None, help="Monte Carlo trials (default 300)")
    sp.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    sp.add_argument("--workers", type=int, default=None, help="parallel trial workers (default 1)")
    sp.add_argument("--config", default=None, help="JSON file mirroring the config fields")
    sp.add_argument("--out", default=None, help="write the report to this path")
    sp.add_argument("--format", choices=("csv", "json"), default=None, dest="fmt")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cheapboot",
        description="Confidence intervals for SGD solutions: cheap bootstrap "
                    "methods, classical baselines, and coverage experiments.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment cell")
    _add_cell_flags(run_p, need_method=True)

    table_p = sub.add_parser("table", help="run the reproduction grid (methods x sigma x d)")
    table_p.add_argument("--problem", choices=("linear", "logistic"), default="linear")
    table_p.add_argument("--full", action="store_true",
                         help="full scale: n=1e5, 500 trials, d in {5,20,200} "
                              "(hours of compute; default is desk scale)")
    table_p.add_argument("--trials", type=int, default=None, help="override the trial count")
    table_p.add_argument("--seed", type=int, default=0)
    table_p.add_argument("--workers", type=int, default=1)
    table_p.add_argument("--out", default=None)
    table_p.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")

    sweep_p = sub.add_parser("sweep", help="coverage/length sensitivity across eta")
    _add_cell_flags(sweep_p, need_method=True)
    sweep_p.add_argument("--eta-grid", default=_DEFAULT_ETA_GRID,
                         help=f"comma-separated eta values (default {_DEFAULT_ETA_GRID})")

    sub.add_parser("selftest", help="quick invariant checks; exit code 0 iff all pass")
    return p


def _resolve_cell_config(args: argparse.Namespace) -> ExperimentConfig:
    file_vals: dict = {}
    if args.config:
        with open(args.config) as fh:
            file_vals = json.load(fh)

    def pick(flag, file_key, builtin):
        v = getattr(args, flag, None)
        if v is not None:
            return v
        if file_key in file_vals:
            return file_vals[file_key]
        return builtin

    method = pick("method", "method", None)
    if method is None:
        raise CheapbootError("a method is required (--method or config file)")
    problem = pick("problem", "problem", "linear")
    sigma = pick("sigma", "sigma", "identity")
    alpha = pick("alpha", "alpha", 1.0 if method == "cofb_sgd" else 0.501)
    eta = pick("eta", "eta", None)
    if eta is None:
        eta = default_eta(problem, method, sigma)
    B = pick("B", "B", _DEFAULT_B.get(method))
    splits = file_vals.get("higrad_splits")
    lengths = file_vals.get("higrad_lengths")
    return ExperimentConfig(
        problem=problem,
        method=method,
        d=pick("d", "d", 5),
        n=pick("n", "n", 10**4),
        eta=float(eta),
        sigma=sigma,
        noise_sd=float(file_vals.get("noise_sd", 1.0)),
        alpha=float(alpha),
        B=B,
        M=file_vals.get("M"),
        higrad_splits=None if splits is None else tuple(splits),
        higrad_lengths=None if lengths is None else tuple(lengths),
        level=pick("level", "level", 0.95),
        trials=pick("trials", "trials", 300),
        master_seed=pick("seed", "master_seed", 0),
        workers=pick("workers", "workers", 1),
    )


def _summary_line(report) -> str:
    c = report.config
    parts = [c.method, c.problem, f"d={c.d}", f"n={c.n}", f"sigma={c.sigma}", f"eta={c.eta:g}"]
    if c.B is not None:
        parts.append(f"B={c.B}")
    return (
        " ".join(parts)
        + f": coverage {100 * report.coverage_mean:.2f}%"
        + f" (se {100 * report.coverage_se:.2f}pp),"
        + f" mean length {report.mean_length:.3e},"
        + f" {report.wall_time_s:.1f}s"
    )


def _emit(reports, fmt, out) -> None:
    text = emit_report(reports, format=fmt or "csv", path=out)
    if out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {len(reports)} record(s) to {out}")


def _cmd_run(args) -> int:
    report = run_cell(_resolve_cell_config(args))
    print(_summary_line(report))
    if args.out is not None or args.fmt is not None:
        _emit([report], args.fmt, args.out)
    return 0


def _cmd_table(args) -> int:
    configs = table_configs(
        problem=args.problem,
        full=args.full,
        master_seed=args.seed,
        workers=args.workers,
        trials=args.trials,
    )
    reports = []
    for i, cfg in enumerate(configs, 1):
        report = run_cell(cfg)
        reports.append(report)
        print(f"[{i}/{len(configs)}] {_summary_line(report)}", flush=True)
    _emit(reports, args.fmt, args.out)
    return 0


def _cmd_sweep(args) -> int:
    base = _resolve_cell_config(args)
    grid = [float(v) for v in args.eta_grid.split(",") if v.strip()]
    reports = sensitivity_sweep(base, grid)
    for report in reports:
        print(_summary_line(report), flush=True)
    _emit(reports, args.fmt, args.out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        from .selftest import run_selftest

        return 0 if run_selftest() else 1
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "table":
            return _cmd_table(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
    except CheapbootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
