"""Outer penalty-decomposition loop.

Drives block descent on q_rho (or its l0-regularized variant) while the
penalty weight grows geometrically, reseeding the copy variable from the
known feasible point whenever the penalty minimum escapes the bound
Upsilon, and stops once x agrees with its sparse copy to the outer
tolerance.  Multiplier estimates fall out of the penalty terms at the
final weight.
"""

import time
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from . import model
from .bcd import BcdConfig, bcd_solve, perturbation_restart
from .errors import InvalidInputError
from .model import Cardinality, Regularized
from .thresholding import hard_threshold_nu, hard_threshold_top_r


@dataclass
class PdConfig:
    rho0: float = 1.0
    sigma: float = float(np.sqrt(10.0))
    outer_tol: float = 1e-4
    outer_scaled: bool = False  # scale the gap test by max(|penalty|, 1)
    max_outer_iters: int = 60
    bcd: BcdConfig = field(default_factory=lambda: BcdConfig(objective_change_tol=1e-4))
    residual_tol0: float = 1e-1  # inner residual schedule eps_k = eps0 * decay^k
    residual_decay: float = 0.5
    residual_floor: float = 1e-8
    upsilon_margin: float = 0.0
    max_restarts: int = 0
    restart_gain: float = 1e-2

    def __post_init__(self):
        if self.rho0 <= 0 or not np.isfinite(self.rho0):
            raise InvalidInputError(f"pd: rho0 must be positive, got {self.rho0}")
        if self.sigma <= 1:
            raise InvalidInputError(f"pd: sigma must exceed 1, got {self.sigma}")
        if self.outer_tol <= 0:
            raise InvalidInputError("pd: outer_tol must be positive")
        if self.max_outer_iters < 1:
            raise InvalidInputError("pd: max_outer_iters must be positive")
        if not 0 < self.residual_decay < 1 or self.residual_tol0 <= 0 or self.residual_floor <= 0:
            raise InvalidInputError("pd: bad residual schedule")


@dataclass
class OuterRecord:
    rho: float
    penalty_total: float
    gap_inf: float
    inner_iterations: int
    terminated_by: str
    safeguard_triggered: bool = False
    objective_sparse: float = float("nan")


@dataclass
class SolveReport:
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    varpi: np.ndarray
    converged: bool
    outer_iterations: int
    rho_final: float
    gap_inf: float
    final_residual: float
    history: List[OuterRecord]
    feasible: bool
    feasibility: object
    kkt: object
    wall_time_s: float

    @property
    def x_sparse(self):
        """x with the J block replaced by the exactly sparse copy y."""
        xs = self.x.copy()
        xs[self._sparse_indices] = self.y
        return xs

    _sparse_indices: np.ndarray = field(default=None, repr=False)


def extract_multipliers(problem, x, y, rho):
    """Multiplier estimates lambda = rho*g^+, mu = rho*h, varpi = rho*(x_J - y)."""
    x = np.asarray(x, dtype=float)
    lam = np.zeros(0)
    mu = np.zeros(0)
    if problem.inequality is not None:
        g, _ = problem.inequality(x)
        lam = rho * np.maximum(np.asarray(g, dtype=float).ravel(), 0.0)
    if problem.equality is not None:
        h, _ = problem.equality(x)
        mu = rho * np.asarray(h, dtype=float).ravel()
    varpi = rho * (x[problem.sparse_indices] - np.asarray(y, dtype=float))
    return lam, mu, varpi


def _objective_at_feasible(problem):
    f, _ = problem.objective(problem.feasible_point)
    f = float(f)
    if isinstance(problem.mode, Regularized):
        f += problem.mode.nu * model.l0_count(problem.feasible_point[problem.sparse_indices])
    return f


def compute_upsilon(problem, y0, rho0, x_step, x0=None, margin=0.0):
    """Level bound: max of the feasible objective and one approximate
    penalty minimization at (rho0, y0), plus margin.

    Any value at or above the max keeps the theory intact.  A zero margin
    is the tightest admissible bound; it makes the reset fire on transient
    penalty overshoots right after each weight increase, which can discard
    good sparse iterates, so the application solvers pass a margin sized
    to the bound itself.
    """
    evaluate = _penalty_evaluator(problem)
    x_start = problem.feasible_point if x0 is None else np.asarray(x0, dtype=float)
    x_try = x_step(x_start, np.asarray(y0, dtype=float), rho0)
    val = evaluate(x_try, np.asarray(y0, dtype=float), rho0).total
    return max(_objective_at_feasible(problem), val) + margin


def feasibility_safeguard(problem, x, y, rho_next, upsilon, x_step):
    """Reset the copy variable when the next penalty escapes Upsilon.

    Runs one x-step at the increased weight; if even the minimized penalty
    exceeds Upsilon, restart y from the feasible point's J block.  Returns
    (y_next, x_warm, triggered).
    """
    evaluate = _penalty_evaluator(problem)
    x_try = np.asarray(x_step(x, y, rho_next), dtype=float)
    val = evaluate(x_try, y, rho_next).total
    if val > upsilon:
        y_reset = problem.feasible_point[problem.sparse_indices].copy()
        return y_reset, problem.feasible_point.copy(), True
    return y, x_try, False


def _penalty_evaluator(problem):
    if isinstance(problem.mode, Regularized):
        return lambda x, y, rho: model.eval_p_penalty(problem, x, y, rho)
    return lambda x, y, rho: model.eval_q_penalty(problem, x, y, rho)


def _default_y_step(problem):
    j = problem.sparse_indices
    forced = problem.forced_zero
    if isinstance(problem.mode, Cardinality):
        r = problem.mode.r
        return lambda x, rho: hard_threshold_top_r(x[j], r, forced_zero=forced)
    nu = problem.mode.nu
    return lambda x, rho: hard_threshold_nu(x[j], nu, rho, forced_zero=forced)


def _pd_solve(problem, x_step, config, y0, x0, y_step):
    t0 = time.perf_counter()
    evaluate = _penalty_evaluator(problem)
    j = problem.sparse_indices

    if y0 is None:
        y = problem.feasible_point[j].copy()
    else:
        y = np.asarray(y0, dtype=float).copy()
        if y.shape != (j.size,):
            raise InvalidInputError(f"y0 must have length {j.size}")
    x = problem.feasible_point.copy() if x0 is None else np.asarray(x0, dtype=float).copy()
    y_step = y_step or _default_y_step(problem)

    rho = config.rho0
    upsilon = compute_upsilon(
        problem, y, rho, x_step, x0=x, margin=config.upsilon_margin
    )

    history = []
    converged = False
    gap = np.inf
    q_val = None
    use_residual = config.bcd.residual_tol is not None

    for k in range(config.max_outer_iters):
        rho_k = rho
        if k > 0:
            y, x, triggered = feasibility_safeguard(problem, x, y, rho_k, upsilon, x_step)
            history[-1].safeguard_triggered = triggered
        bcd_cfg = config.bcd
        if use_residual:
            eps_k = max(config.residual_tol0 * config.residual_decay**k, config.residual_floor)
            bcd_cfg = replace(config.bcd, residual_tol=eps_k)

        res_oracle = (
            (lambda xx, yy: model.projected_gradient_residual(problem, xx, yy, rho_k))
            if use_residual
            else None
        )
        result = bcd_solve(
            lambda xx, yy: evaluate(xx, yy, rho_k),
            lambda xx, yy: x_step(xx, yy, rho_k),
            lambda xx: y_step(xx, rho_k),
            x,
            y,
            bcd_cfg,
            residual=res_oracle,
        )
        if config.max_restarts > 0:
            result, _ = perturbation_restart(
                lambda xx, yy: evaluate(xx, yy, rho_k),
                lambda xx, yy: x_step(xx, yy, rho_k),
                lambda xx: y_step(xx, rho_k),
                result,
                bcd_cfg,
                residual=res_oracle,
                restart_gain=config.restart_gain,
                max_restarts=config.max_restarts,
            )
        x, y, q_val = result.x, result.y, result.value

        gap = float(np.linalg.norm(x[j] - y, np.inf)) if j.size else 0.0
        viol = 0.0
        if problem.inequality is not None:
            g, _ = problem.inequality(x)
            viol = float(np.max(np.maximum(g, 0.0), initial=0.0))
        if problem.equality is not None:
            h, _ = problem.equality(x)
            viol = max(viol, float(np.max(np.abs(h), initial=0.0)))
        x_cand = x.copy()
        x_cand[j] = y
        try:
            f_cand = float(problem.objective(x_cand)[0])
        except Exception:
            f_cand = float("nan")
        record = OuterRecord(
            rho=rho_k,
            penalty_total=q_val.total,
            gap_inf=gap,
            inner_iterations=result.trace.iterations,
            terminated_by=result.trace.terminated_by,
            objective_sparse=f_cand,
        )
        history.append(record)

        # smooth-constraint violation joins the gap: both are penalty-driven
        measure = max(gap, viol)
        if config.outer_scaled:
            measure /= max(abs(q_val.total), 1.0)
        if measure <= config.outer_tol:
            converged = True
            break

        rho = rho * config.sigma

    lam, mu, varpi = extract_multipliers(problem, x, y, rho_k)
    final_residual = model.projected_gradient_residual(problem, x, y, rho_k)
    kkt = model.kkt_residual(
        problem, x, lam, mu, varpi, support_tol=max(model.SUPPORT_TOL, gap)
    )
    feas_tol = config.outer_tol * max(abs(q_val.total), 1.0) if config.outer_scaled else config.outer_tol
    feasible, feas_report = model.is_feasible(problem, x, tol=max(feas_tol, model.SUPPORT_TOL))

    return SolveReport(
        x=x,
        y=y,
        lam=lam,
        mu=mu,
        varpi=varpi,
        converged=converged,
        outer_iterations=len(history),
        rho_final=rho_k,
        gap_inf=gap,
        final_residual=final_residual,
        history=history,
        feasible=feasible,
        feasibility=feas_report,
        kkt=kkt,
        wall_time_s=time.perf_counter() - t0,
        _sparse_indices=j,
    )


def pd_solve_constrained(problem, x_step, config, y0=None, x0=None, y_step=None):
    """Penalty decomposition for the cardinality-budgeted form.

    x_step(x, y, rho) approximately minimizes the penalty over X from the
    warm start x; the default y-step keeps the r largest J entries of x.
    The report's y always satisfies the budget exactly; x satisfies the
    smooth constraints to the outer tolerance.
    """
    if not isinstance(problem.mode, Cardinality):
        raise InvalidInputError("pd_solve_constrained requires Cardinality mode")
    return _pd_solve(problem, x_step, config, y0, x0, y_step)


def pd_solve_regularized(problem, x_step, config, y0=None, x0=None, y_step=None):
    """Penalty decomposition for the l0-surcharged form (nu per nonzero)."""
    if not isinstance(problem.mode, Regularized):
        raise InvalidInputError("pd_solve_regularized requires Regularized mode")
    return _pd_solve(problem, x_step, config, y0, x0, y_step)
