"""Command-line front end.

One subcommand per experiment family; every subcommand accepts the full
shared flag set so scripts can swap experiments without reshuffling
arguments.  Results go to stdout as aligned key=value lines and, with
--out, to a CSV with the canonical column names.

Exit codes: 0 success, 2 invalid arguments or data values, 3 numeric
failure, 4 file I/O or format trouble.
"""

import argparse
import sys
import time

import numpy as np

from . import runners
from .applications import (
    CovselInstance,
    CsInstance,
    covsel_defaults,
    cs_noiseless_defaults,
    cs_noisy_defaults,
    error_rate,
    log_likelihood,
    logistic_defaults,
    logistic_loss,
    solve_covsel,
    solve_cs_noiseless,
    solve_cs_noisy,
    solve_sparse_logistic,
)
from .errors import DataFormatError, InvalidInputError, NumericError, PdsparseError
from .matio import read_logistic_csv, read_matrix, write_table
from .model import l0_count


def _cardinalities(text):
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cardinality list {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty cardinality list")
    return values


def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--n", type=int, default=0, help="sample or measurement count")
    shared.add_argument("--p", type=int, default=0, help="variable count")
    shared.add_argument("--r", type=_cardinalities, default=(),
                        help="cardinality budget or comma list of budgets")
    shared.add_argument("--trials", type=int, default=1, help="instances per table row")
    shared.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    shared.add_argument("--out", default=None, help="write results CSV here")
    shared.add_argument("--orthonormal", action="store_true",
                        help="orthonormalize the measurement rows")
    shared.add_argument("--nu", type=float, default=1.0, help="per-nonzero surcharge")
    shared.add_argument("--rho0", type=float, default=None, help="initial penalty weight")
    shared.add_argument("--sigma", type=float, default=None, help="penalty growth factor")
    shared.add_argument("--tol-inner", type=float, default=None, dest="tol_inner",
                        help="inner sweep termination tolerance")
    shared.add_argument("--tol-outer", type=float, default=None, dest="tol_outer",
                        help="outer copy-gap tolerance")
    shared.add_argument("--jobs", type=int, default=1, help="worker threads across trials")

    parser = argparse.ArgumentParser(
        prog="pdsparse",
        description="Sparse optimization experiments via penalty decomposition.")
    sub = parser.add_subparsers(dest="command", required=True)

    cmd = sub.add_parser("cs-noiseless", parents=[shared],
                         help="recover a sparse signal from exact measurements")
    cmd.add_argument("--matrix", default=None, help="measurement matrix CSV")
    cmd.add_argument("--rhs", default=None, help="observation vector CSV")

    cmd = sub.add_parser("cs-noisy", parents=[shared],
                         help="best cardinality-budgeted least-squares fit")
    cmd.add_argument("--matrix", default=None, help="measurement matrix CSV")
    cmd.add_argument("--rhs", default=None, help="observation vector CSV")

    sub.add_parser("cs-table", parents=[shared],
                   help="recovery counts over trials per cardinality")

    sub.add_parser("tradeoff", parents=[shared],
                   help="residual versus cardinality sweep with a hard-threshold baseline")

    cmd = sub.add_parser("logistic", parents=[shared],
                         help="cardinality-constrained logistic regression")
    cmd.add_argument("--data", default=None,
                     help="dataset CSV: outcome column then features")

    cmd = sub.add_parser("covsel", parents=[shared],
                         help="sparse inverse covariance estimate")
    cmd.add_argument("--matrix", default=None, help="sample covariance CSV")
    cmd.add_argument("--density", type=float, default=0.1,
                     help="off-diagonal density of the generated truth")
    cmd.add_argument("--pattern", choices=("dense-random", "pm1-sparse"),
                     default="dense-random", help="generated truth structure")

    cmd = sub.add_parser("covsel-table", parents=[shared],
                         help="covariance-selection quality over trials")
    cmd.add_argument("--density", type=float, default=0.1,
                     help="off-diagonal density of the generated truth")
    cmd.add_argument("--pattern", choices=("dense-random", "pm1-sparse"),
                     default="dense-random", help="generated truth structure")

    cmd = sub.add_parser("counterexample", parents=[shared],
                         help="fractional-power surrogate versus the true count")
    cmd.add_argument("--exponent", type=float, default=0.5,
                     help="surrogate norm power in (0, 1]")

    return parser


def _experiment_config(args):
    return runners.ExperimentConfig(
        name=args.command,
        n=args.n,
        p=args.p,
        r_values=args.r,
        trials=args.trials,
        seed=args.seed,
        out=args.out,
        orthonormal=args.orthonormal,
        nu=args.nu,
        density=getattr(args, "density", 0.1),
        pattern=getattr(args, "pattern", "dense-random"),
        exponent=getattr(args, "exponent", 0.5),
        rho0=args.rho0,
        sigma=args.sigma,
        tol_inner=args.tol_inner,
        tol_outer=args.tol_outer,
        jobs=args.jobs,
    )


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(value)
    return f"{float(value):.6g}"


def _print_rows(rows):
    for row in rows:
        print("  ".join(f"{key}={_fmt(val)}" for key, val in row.items()))


def _single_r(config):
    if len(config.r_values) != 1:
        raise InvalidInputError(f"{config.name}: file mode takes exactly one --r value")
    return config.r_values[0]


def _file_result(config, columns, row, report):
    if config.out:
        write_table(config.out, columns, [row])
    return runners.RunResult(columns, [row], [runners._diag(report)])


def _load_cs(args):
    if bool(args.matrix) != bool(args.rhs):
        raise InvalidInputError(f"{args.command}: --matrix and --rhs go together")
    a = read_matrix(args.matrix)
    b = read_matrix(args.rhs).ravel()
    return CsInstance(a, b)


def _cs_noiseless_file(args, config):
    inst = _load_cs(args)
    solver = runners._solver_config(cs_noiseless_defaults(), config, "iterate_change_tol")
    t0 = time.perf_counter()
    x, report = solve_cs_noiseless(inst, config=solver, nu=config.nu)
    ms = 1e3 * (time.perf_counter() - t0)
    row = {"r": l0_count(report.y),
           "residual": float(np.linalg.norm(inst.a @ x - inst.b)),
           "time_ms": ms, "iters": report.outer_iterations}
    return _file_result(config, ("r", "residual", "time_ms", "iters"), row, report)


def _cs_noisy_file(args, config):
    inst = _load_cs(args)
    r = _single_r(config)
    solver = runners._solver_config(cs_noisy_defaults(), config, "objective_change_tol")
    t0 = time.perf_counter()
    x, report = solve_cs_noisy(inst, r, config=solver)
    ms = 1e3 * (time.perf_counter() - t0)
    row = {"r": r, "residual": float(np.linalg.norm(inst.a @ x - inst.b)),
           "time_ms": ms, "iters": report.outer_iterations}
    return _file_result(config, ("r", "residual", "time_ms", "iters"), row, report)


def _logistic_file(args, config):
    dataset = read_logistic_csv(args.data)
    r = _single_r(config)
    solver = runners._solver_config(logistic_defaults(), config, "iterate_change_tol")
    t0 = time.perf_counter()
    logmodel, report = solve_sparse_logistic(dataset, r, config=solver)
    ms = 1e3 * (time.perf_counter() - t0)
    row = {"r": r, "time_ms": ms, "iters": report.outer_iterations,
           "loss": float(logistic_loss(dataset, logmodel)[0]),
           "error_pct": error_rate(logmodel, dataset.features, dataset.outcomes)}
    return _file_result(config, ("r", "time_ms", "iters", "loss"), row, report)


def _covsel_file(args, config):
    inst = CovselInstance(read_matrix(args.matrix))
    r = _single_r(config)
    solver = runners._solver_config(covsel_defaults(), config, "objective_change_tol")
    t0 = time.perf_counter()
    x, report = solve_covsel(inst, r, config=solver)
    ms = 1e3 * (time.perf_counter() - t0)
    row = {"r": r, "time_ms": ms, "iters": report.outer_iterations,
           "likelihood": log_likelihood(inst.sigma_hat, x)}
    return _file_result(config, ("r", "time_ms", "iters", "likelihood"), row, report)


def _dispatch(args, config):
    if args.command == "cs-noiseless":
        if args.matrix or args.rhs:
            return _cs_noiseless_file(args, config)
        return runners.run_cs_recovery_table(config)
    if args.command == "cs-noisy":
        if args.matrix or args.rhs:
            return _cs_noisy_file(args, config)
        return runners.run_cs_noisy(config)
    if args.command == "cs-table":
        return runners.run_cs_recovery_table(config)
    if args.command == "tradeoff":
        return runners.run_tradeoff_curve(config)
    if args.command == "logistic":
        if args.data:
            return _logistic_file(args, config)
        return runners.run_logistic(config)
    if args.command == "covsel":
        if args.matrix:
            return _covsel_file(args, config)
        return runners.run_covsel_table(config)
    if args.command == "covsel-table":
        return runners.run_covsel_table(config)
    if args.command == "counterexample":
        return runners.run_counterexample(config)
    raise InvalidInputError(f"unknown command {args.command!r}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _experiment_config(args)
        result = _dispatch(args, config)
        _print_rows(result.rows)
        for label, path in result.extra_files.items():
            print(f"{label} curve written to {path}")
        if config.out:
            print(f"results written to {config.out}")
        return 0
    except (DataFormatError, OSError) as exc:
        print(f"pdsparse: {exc}", file=sys.stderr)
        return 4
    except (NumericError, PdsparseError) as exc:
        code = 2 if isinstance(exc, InvalidInputError) else 3
        print(f"pdsparse: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
