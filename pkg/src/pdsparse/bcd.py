"""Two-block coordinate descent on a penalty q_rho(x, y).

Alternates an x-step (caller-supplied solver over the convex set) with a
closed-form y-step, monitoring the descent chain

    q(x+, y+) <= q(x+, y) <= q(x, y)

every iteration; a violation beyond slack means a broken subsolver and
raises MonotonicityError.  Termination criteria (any subset may be active):
projected-gradient residual, relative iterate change, relative objective
change.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import InvalidInputError, MonotonicityError

RESIDUAL = "residual"
ITERATE_CHANGE = "iterate_change"
OBJECTIVE_CHANGE = "objective_change"
MAX_ITERATIONS = "max_iterations"


@dataclass
class BcdConfig:
    residual_tol: Optional[float] = None
    iterate_change_tol: Optional[float] = None
    objective_change_tol: Optional[float] = None
    max_inner_iters: int = 500
    monotone_slack: float = 1e-8  # scaled by 1 + |q|; 1e-12 suits exact x-steps

    def __post_init__(self):
        tols = (self.residual_tol, self.iterate_change_tol, self.objective_change_tol)
        if all(t is None for t in tols):
            raise InvalidInputError("bcd: at least one termination criterion must be active")
        for t in tols:
            if t is not None and (not np.isfinite(t) or t <= 0):
                raise InvalidInputError(f"bcd: tolerances must be positive, got {t}")
        if self.max_inner_iters < 1:
            raise InvalidInputError("bcd: max_inner_iters must be positive")
        if self.monotone_slack < 0:
            raise InvalidInputError("bcd: monotone_slack must be nonnegative")


@dataclass
class BcdTrace:
    """values[l] is q after full iteration l; mid_values[l] after its x-step."""

    values: List[float] = field(default_factory=list)
    mid_values: List[float] = field(default_factory=list)
    iterations: int = 0
    terminated_by: str = MAX_ITERATIONS


@dataclass
class BcdResult:
    x: np.ndarray
    y: np.ndarray
    value: object  # PenaltyValue at (x, y)
    trace: BcdTrace


def _rel_change(new, old):
    diff = float(np.linalg.norm(new - old, np.inf)) if new.size else 0.0
    return diff / max(float(np.linalg.norm(new, np.inf)) if new.size else 0.0, 1.0)


def bcd_solve(evaluate, x_step, y_step, x0, y0, config, residual=None):
    """Run block descent from (x0, y0).

    evaluate(x, y) -> PenaltyValue, x_step(x, y) -> x, y_step(x) -> y,
    residual(x, y) -> float (required iff residual_tol is set).
    """
    if config.residual_tol is not None and residual is None:
        raise InvalidInputError("bcd: residual criterion active but no residual oracle given")

    x = np.asarray(x0, dtype=float).copy()
    y = np.asarray(y0, dtype=float).copy()
    q_curr = evaluate(x, y)
    trace = BcdTrace()

    for it in range(1, config.max_inner_iters + 1):
        x_new = np.asarray(x_step(x, y), dtype=float)
        q_mid = evaluate(x_new, y)
        slack = config.monotone_slack * (1.0 + abs(q_curr.total))
        if q_mid.total > q_curr.total + slack:
            raise MonotonicityError(
                f"bcd: x-step increased the penalty by {q_mid.total - q_curr.total:.3e} at iteration {it}"
            )
        y_new = np.asarray(y_step(x_new), dtype=float)
        q_new = evaluate(x_new, y_new)
        if q_new.total > q_mid.total + config.monotone_slack * (1.0 + abs(q_mid.total)):
            raise MonotonicityError(
                f"bcd: y-step increased the penalty by {q_new.total - q_mid.total:.3e} at iteration {it}"
            )

        trace.mid_values.append(q_mid.total)
        trace.values.append(q_new.total)
        trace.iterations = it

        terminated = None
        if config.residual_tol is not None:
            if residual(x_new, y_new) <= config.residual_tol:
                terminated = RESIDUAL
        if terminated is None and config.iterate_change_tol is not None:
            change = max(_rel_change(x_new, x), _rel_change(y_new, y))
            if change <= config.iterate_change_tol:
                terminated = ITERATE_CHANGE
        if terminated is None and config.objective_change_tol is not None:
            change = abs(q_new.total - q_curr.total) / max(abs(q_curr.total), 1.0)
            if change <= config.objective_change_tol:
                terminated = OBJECTIVE_CHANGE

        x, y, q_curr = x_new, y_new, q_new
        if terminated is not None:
            trace.terminated_by = terminated
            break

    return BcdResult(x=x, y=y, value=q_curr, trace=trace)


def smallest_nonzero_zeroed(y):
    """Copy of y with its smallest-magnitude nonzero set to zero.

    The closest point to y among vectors with one fewer nonzero; ties go
    to the lowest index.
    """
    y = np.asarray(y, dtype=float).copy()
    nz = np.flatnonzero(y != 0.0)
    if nz.size == 0:
        return y
    y[nz[int(np.argmin(np.abs(y[nz])))]] = 0.0
    return y


def perturbation_restart(
    evaluate,
    x_step,
    y_step,
    incumbent,
    config,
    residual=None,
    restart_gain=1e-2,
    max_restarts=3,
):
    """Retry block descent from a sparser start and adopt clear improvements.

    Takes a BcdResult incumbent; while its y has more than one nonzero,
    reruns bcd_solve from (x, y-with-smallest-nonzero-dropped) and adopts
    the rerun iff it improves the penalty by at least
    restart_gain * max(|q|, 1).  Never returns a worse triple than it was
    given.  Returns (result, adopted_count).
    """
    if max_restarts < 0 or restart_gain < 0:
        raise InvalidInputError("restart: gain and count must be nonnegative")
    result = incumbent
    adopted = 0
    for _ in range(max_restarts):
        if np.count_nonzero(result.y) <= 1:
            break
        y_try = smallest_nonzero_zeroed(result.y)
        candidate = bcd_solve(evaluate, x_step, y_step, result.x, y_try, config, residual=residual)
        gain = result.value.total - candidate.value.total
        if gain >= restart_gain * max(abs(result.value.total), 1.0):
            result = candidate
            adopted += 1
        else:
            break
    return result, adopted
