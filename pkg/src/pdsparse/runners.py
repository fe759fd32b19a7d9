"""Experiment drivers: generate instances, solve, aggregate, write CSV.

Every runner is deterministic for a fixed config: instance data comes
from per-(experiment, cardinality, trial) seed streams, trials may run on
a thread pool, and aggregation always walks trials in index order, so the
output bytes do not depend on the parallelism degree (wall-clock columns
aside).
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import rng
from .applications import (
    CsInstance,
    cs_noiseless_defaults,
    cs_noisy_defaults,
    covsel_defaults,
    error_rate,
    iht_baseline,
    log_likelihood,
    logistic_defaults,
    logistic_loss,
    lp_counterexample,
    normalized_entropy_loss,
    solve_covsel,
    solve_cs_noiseless,
    solve_cs_noisy,
    solve_sparse_logistic,
)
from .errors import InvalidInputError
from .generators import gen_covsel_instance, gen_cs_instance, gen_logistic_instance
from .linalg import inverse_spd, orthonormalize_rows
from .matio import write_table
from .model import l0_count


@dataclass
class ExperimentConfig:
    """Shared knobs for one experiment run.

    Solver overrides left at None keep the application defaults; tol_inner
    targets whichever inner criterion the application uses.
    """

    name: str
    n: int = 0
    p: int = 0
    r_values: tuple = ()
    trials: int = 1
    seed: int = 0
    out: Optional[str] = None
    orthonormal: bool = False
    nu: float = 1.0
    density: float = 0.1
    pattern: str = "dense-random"
    exponent: float = 1.0
    rho0: Optional[float] = None
    sigma: Optional[float] = None
    tol_inner: Optional[float] = None
    tol_outer: Optional[float] = None
    jobs: int = 1

    def __post_init__(self):
        self.r_values = tuple(int(r) for r in self.r_values)
        if self.trials < 1:
            raise InvalidInputError(f"{self.name}: trials must be >= 1, got {self.trials}")
        if self.jobs < 1:
            raise InvalidInputError(f"{self.name}: jobs must be >= 1, got {self.jobs}")


@dataclass
class RunResult:
    """Rows ready for write_table plus per-solve diagnostics.

    Rows may carry keys beyond `columns` (error rate, support match);
    only the listed columns reach the CSV.
    """

    columns: tuple
    rows: list
    diagnostics: list = field(default_factory=list)
    extra_files: dict = field(default_factory=dict)


def _solver_config(defaults, config, inner_field):
    cfg = defaults
    if config.rho0 is not None:
        cfg = replace(cfg, rho0=config.rho0)
    if config.sigma is not None:
        cfg = replace(cfg, sigma=config.sigma)
    if config.tol_outer is not None:
        cfg = replace(cfg, outer_tol=config.tol_outer)
    if config.tol_inner is not None:
        cfg = replace(cfg, bcd=replace(cfg.bcd, **{inner_field: config.tol_inner}))
    return cfg


def _map_trials(fn, count, jobs):
    if jobs <= 1 or count <= 1:
        return [fn(t) for t in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(count)))


def _diag(report):
    return {
        "converged": bool(report.converged),
        "stationarity": float(report.kkt.stationarity_residual),
        "complementarity": float(report.kkt.complementarity_residual),
        "eps_final": max(float(report.final_residual), 1e-9),
    }


def _mean(values):
    return float(np.mean(np.asarray(values, dtype=float)))


def _require_dims(config):
    if config.n < 1 or config.p < 1:
        raise InvalidInputError(f"{config.name}: need positive dimensions, got n={config.n}, p={config.p}")
    if not config.r_values:
        raise InvalidInputError(f"{config.name}: need at least one cardinality")


def run_cs_recovery_table(config):
    """Noiseless recovery counts per cardinality, independent trials.

    A trial succeeds when the sparse copy has exactly the planted
    cardinality and ||x - u|| / p < 1e-4.
    """
    _require_dims(config)
    solver = _solver_config(cs_noiseless_defaults(), config, "iterate_change_tol")
    rows, diags = [], []
    for r in config.r_values:
        def trial(t, r=r):
            inst = gen_cs_instance(config.n, config.p, r,
                                   rng.child_seed(config.seed, "cs", r, t),
                                   orthonormal=config.orthonormal)
            t0 = time.perf_counter()
            x, report = solve_cs_noiseless(inst, config=solver, nu=config.nu)
            ms = 1e3 * (time.perf_counter() - t0)
            mse = float(np.linalg.norm(x - inst.truth)) / config.p
            recovered = l0_count(report.y) == r and mse < 1e-4
            return recovered, mse, ms, report
        results = _map_trials(trial, config.trials, config.jobs)
        rows.append({
            "r": r,
            "ns": int(sum(rec for rec, _, _, _ in results)),
            "mse_mean": _mean([mse for _, mse, _, _ in results]),
            "time_ms": _mean([ms for _, _, ms, _ in results]),
            "iters": _mean([rep.outer_iterations for _, _, _, rep in results]),
        })
        diags.extend(_diag(rep) for _, _, _, rep in results)
    columns = ("r", "ns", "mse_mean", "time_ms", "iters")
    if config.out:
        write_table(config.out, columns, rows)
    return RunResult(columns, rows, diags)


def _noisy_instance(config, t):
    # both the matrix and the observation are raw gaussians: the
    # observation need not lie in any sparse image
    seed = rng.child_seed(config.seed, "cs-noisy", t)
    a = rng.gaussians(rng.stream(seed, "cs-noisy", "matrix"), (config.n, config.p))
    if config.orthonormal:
        a = orthonormalize_rows(a)
    b = rng.gaussians(rng.stream(seed, "cs-noisy", "rhs"), config.n)
    return seed, CsInstance(a, b)


def _random_sparse_start(seed, p, r):
    y0 = np.zeros(p)
    pos = rng.sample_without_replacement(rng.stream(seed, "cs-noisy", "y0-support", r), p, r)
    y0[pos] = rng.gaussians(rng.stream(seed, "cs-noisy", "y0-values", r), r)
    return y0


def run_cs_noisy(config):
    """Budgeted least squares per cardinality, independent trials."""
    _require_dims(config)
    solver = _solver_config(cs_noisy_defaults(), config, "objective_change_tol")
    rows, diags = [], []
    for r in config.r_values:
        def trial(t, r=r):
            seed, inst = _noisy_instance(config, t)
            y0 = _random_sparse_start(seed, config.p, r)
            t0 = time.perf_counter()
            x, report = solve_cs_noisy(inst, r, config=solver, y0=y0)
            ms = 1e3 * (time.perf_counter() - t0)
            return float(np.linalg.norm(inst.a @ x - inst.b)), ms, report
        results = _map_trials(trial, config.trials, config.jobs)
        rows.append({
            "r": r,
            "residual": _mean([res for res, _, _ in results]),
            "time_ms": _mean([ms for _, ms, _ in results]),
            "iters": _mean([rep.outer_iterations for _, _, rep in results]),
        })
        diags.extend(_diag(rep) for _, _, rep in results)
    columns = ("r", "residual", "time_ms", "iters")
    if config.out:
        write_table(config.out, columns, rows)
    return RunResult(columns, rows, diags)


def run_tradeoff_curve(config):
    """Residual versus cardinality, warm-started, with the IHT baseline.

    Sweeps r = 1..max(r_values) on each instance, seeding every solve
    from the previous cardinality's answer, and accumulates per-instance
    time.  The baseline curve lands next to the main output with an
    .iht.csv suffix.
    """
    _require_dims(config)
    rmax = max(config.r_values)
    if rmax > config.p:
        raise InvalidInputError(f"{config.name}: sweep cap {rmax} exceeds p={config.p}")
    solver = _solver_config(cs_noisy_defaults(), config, "objective_change_tol")

    def sweep(t):
        seed, inst = _noisy_instance(config, t)
        pd_res = np.empty(rmax)
        pd_ms = np.empty(rmax)
        pd_iters = np.empty(rmax, dtype=int)
        iht_res = np.empty(rmax)
        iht_ms = np.empty(rmax)
        reports = []
        x_prev = y_prev = None
        x_iht = None
        acc_pd = acc_iht = 0.0
        for r in range(1, rmax + 1):
            y0 = _random_sparse_start(seed, config.p, r) if y_prev is None else y_prev
            t0 = time.perf_counter()
            xs, report = solve_cs_noisy(inst, r, config=solver, x0=x_prev, y0=y0)
            acc_pd += 1e3 * (time.perf_counter() - t0)
            x_prev, y_prev = report.x, report.y
            pd_res[r - 1] = float(np.linalg.norm(inst.a @ xs - inst.b))
            pd_ms[r - 1] = acc_pd
            pd_iters[r - 1] = report.outer_iterations
            reports.append(report)

            t0 = time.perf_counter()
            x_iht = iht_baseline(inst, r, tol=1e-6, x0=x_iht)
            acc_iht += 1e3 * (time.perf_counter() - t0)
            iht_res[r - 1] = float(np.linalg.norm(inst.a @ x_iht - inst.b))
            iht_ms[r - 1] = acc_iht
        return pd_res, pd_ms, pd_iters, iht_res, iht_ms, reports

    results = _map_trials(sweep, config.trials, config.jobs)
    rows, iht_rows, diags = [], [], []
    for i in range(rmax):
        rows.append({
            "r": i + 1,
            "residual": _mean([res[i] for res, _, _, _, _, _ in results]),
            "time_ms": _mean([ms[i] for _, ms, _, _, _, _ in results]),
            "iters": _mean([it[i] for _, _, it, _, _, _ in results]),
        })
        iht_rows.append({
            "r": i + 1,
            "residual": _mean([res[i] for _, _, _, res, _, _ in results]),
            "time_ms": _mean([ms[i] for _, _, _, _, ms, _ in results]),
        })
    for *_, reports in results:
        diags.extend(_diag(rep) for rep in reports)

    columns = ("r", "residual", "time_ms", "iters")
    extra_files = {}
    if config.out:
        write_table(config.out, columns, rows)
        stem, ext = os.path.splitext(config.out)
        iht_path = stem + ".iht" + (ext or ".csv")
        write_table(iht_path, ("r", "residual", "time_ms"), iht_rows)
        extra_files["iht"] = iht_path
    return RunResult(columns, rows, diags, extra_files)


def run_logistic(config):
    """Sparse logistic fits per cardinality on shared per-trial datasets.

    Rows carry the average training loss; the average error rate rides
    along under the extra key error_pct.
    """
    _require_dims(config)
    solver = _solver_config(logistic_defaults(), config, "iterate_change_tol")
    rows, diags = [], []
    for r in config.r_values:
        def trial(t, r=r):
            dataset = gen_logistic_instance(config.n, config.p,
                                            rng.child_seed(config.seed, "logistic", t))
            t0 = time.perf_counter()
            logmodel, report = solve_sparse_logistic(dataset, r, config=solver)
            ms = 1e3 * (time.perf_counter() - t0)
            loss = float(logistic_loss(dataset, logmodel)[0])
            err = error_rate(logmodel, dataset.features, dataset.outcomes)
            return loss, err, ms, report
        results = _map_trials(trial, config.trials, config.jobs)
        rows.append({
            "r": r,
            "time_ms": _mean([ms for _, _, ms, _ in results]),
            "iters": _mean([rep.outer_iterations for _, _, _, rep in results]),
            "loss": _mean([loss for loss, _, _, _ in results]),
            "error_pct": _mean([err for _, err, _, _ in results]),
        })
        diags.extend(_diag(rep) for _, _, _, rep in results)
    columns = ("r", "time_ms", "iters", "loss")
    if config.out:
        write_table(config.out, columns, rows)
    return RunResult(columns, rows, diags)


def _support_match_pct(x, truth, tol=1e-6):
    # fraction of off-diagonal positions whose zero/nonzero status agrees
    p = truth.shape[0]
    off = ~np.eye(p, dtype=bool)
    agree = (np.abs(x[off]) > tol) == (truth[off] != 0.0)
    return 100.0 * float(np.mean(agree))


def run_covsel_table(config):
    """Covariance-selection quality per cardinality.

    Instances depend on the trial only, so the cardinality column sweeps
    nested budgets on the same data.  In pm1 pattern mode an empty
    cardinality list defaults to the ground truth's unordered pair count,
    and rows carry the support agreement under the extra key support_pct.
    """
    if config.p < 2:
        raise InvalidInputError(f"{config.name}: need p >= 2, got {config.p}")
    solver = _solver_config(covsel_defaults(), config, "objective_change_tol")
    pm1 = config.pattern == "pm1-sparse"
    if not config.r_values and not pm1:
        raise InvalidInputError(f"{config.name}: need at least one cardinality")

    # the planted +-1 structure sits near unit scale, so it gets a gentler
    # perturbation; the dense family keeps the default
    tau = 0.075 if pm1 else 0.15

    def make_instance(t):
        return gen_covsel_instance(config.p, density=config.density, tau=tau,
                                   seed=rng.child_seed(config.seed, "covsel", t),
                                   pattern=config.pattern)

    r_values = config.r_values
    if not r_values:
        r_values = (make_instance(0).meta["offdiag_nnz"] // 2,)

    rows, diags = [], []
    for r in r_values:
        def trial(t, r=r):
            inst = make_instance(t)
            t0 = time.perf_counter()
            x, report = solve_covsel(inst, r, config=solver)
            ms = 1e3 * (time.perf_counter() - t0)
            like = log_likelihood(inst.sigma_hat, x)
            loss = normalized_entropy_loss(inverse_spd(inst.truth), x)
            match = _support_match_pct(x, inst.truth)
            return like, loss, match, ms, report
        results = _map_trials(trial, config.trials, config.jobs)
        row = {
            "r": r,
            "time_ms": _mean([ms for _, _, _, ms, _ in results]),
            "iters": _mean([rep.outer_iterations for _, _, _, _, rep in results]),
            "likelihood": _mean([like for like, _, _, _, _ in results]),
            "loss": _mean([loss for _, loss, _, _, _ in results]),
            "support_pct": _mean([match for _, _, match, _, _ in results]),
        }
        rows.append(row)
        diags.extend(_diag(rep) for _, _, _, _, rep in results)
    columns = ("r", "time_ms", "iters", "likelihood", "loss")
    if config.out:
        write_table(config.out, columns, rows)
    return RunResult(columns, rows, diags)


def run_counterexample(config):
    """Two candidate solutions of the surrogate construction, one file.

    The two-spike point is what the per-entry count prefers; the spread
    point is what the fractional-power surrogate prefers.  Rows hold each
    point's cardinality, objective value, and constraint residual.
    """
    if config.n < 1:
        raise InvalidInputError(f"{config.name}: need n >= 1, got {config.n}")
    b1 = rng.gaussians(rng.stream(config.seed, "counterexample", "b1"), config.n)
    b2 = rng.gaussians(rng.stream(config.seed, "counterexample", "b2"), config.n)
    report = lp_counterexample(config.exponent, config.nu, b1, b2)
    rows = [
        {"r": l0_count(report.x_two_spike), "residual": report.residual_two_spike,
         "loss": report.value_two_spike},
        {"r": l0_count(report.x_spread), "residual": report.residual_spread,
         "loss": report.value_spread},
    ]
    columns = ("r", "residual", "loss")
    if config.out:
        write_table(config.out, columns, rows)
    return RunResult(columns, rows)
