"""Problem container and penalty-function evaluations.

A sparsity problem is

    minimize  f(x)   subject to  g(x) <= 0,  h(x) = 0,  x in X,

plus either a cardinality budget ||x_J||_0 <= r or an l0 surcharge
nu * ||x_J||_0 on a designated index block J.  The quadratic penalty

    q_rho(x, y) = f(x) + (rho/2) (||g(x)^+||^2 + ||h(x)||^2 + ||x_J - y||^2)

couples x to a copy variable y that carries the sparsity; the regularized
variant adds nu * ||y||_0.  Oracles are plain callables returning value and
derivative together.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import InvalidInputError, NumericError

SUPPORT_TOL = 1e-8


def l0_count(v, tol=SUPPORT_TOL):
    """Number of entries of v larger than tol in magnitude."""
    v = np.asarray(v)
    if v.size == 0:
        return 0
    return int(np.count_nonzero(np.abs(v) > tol))


@dataclass(frozen=True)
class Cardinality:
    """Budget constraint ||x_J||_0 <= r."""

    r: int

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 0:
            raise InvalidInputError(f"cardinality budget must be a nonnegative integer, got {self.r}")
        object.__setattr__(self, "r", int(self.r))


@dataclass(frozen=True)
class Regularized:
    """Objective surcharge nu * ||x_J||_0."""

    nu: float

    def __post_init__(self):
        if not np.isfinite(self.nu) or self.nu < 0:
            raise InvalidInputError(f"l0 weight must be a nonnegative real, got {self.nu}")
        object.__setattr__(self, "nu", float(self.nu))


Mode = Union[Cardinality, Regularized]


@dataclass
class SparsityProblem:
    """Oracles and structure of one sparse-optimization instance.

    objective(x) -> (f, grad); inequality/equality, when present, return
    (values, jacobian) with one row per constraint.  projection maps onto
    the closed convex set X (identity when omitted).  sparse_indices holds
    the block J as strictly increasing 0-based positions.  forced_zero
    optionally marks J-positions pinned to zero in the copy variable, and
    sparsity_count(x, tol) can override how the budget check counts a
    solution (used when the budget ranges over coordinate groups rather
    than single entries).
    """

    objective: Callable
    n: int
    sparse_indices: np.ndarray
    mode: Mode
    feasible_point: np.ndarray
    inequality: Optional[Callable] = None
    equality: Optional[Callable] = None
    projection: Optional[Callable] = None
    forced_zero: Optional[np.ndarray] = None
    sparsity_count: Optional[Callable] = None

    def __post_init__(self):
        if self.n <= 0:
            raise InvalidInputError("problem dimension must be positive")
        j = np.asarray(self.sparse_indices, dtype=int).ravel()
        if j.size and (np.any(j < 0) or np.any(j >= self.n) or np.any(np.diff(j) <= 0)):
            raise InvalidInputError("sparse_indices must be strictly increasing within [0, n)")
        self.sparse_indices = j
        if not isinstance(self.mode, (Cardinality, Regularized)):
            raise InvalidInputError("mode must be Cardinality or Regularized")
        xf = np.asarray(self.feasible_point, dtype=float).ravel()
        if xf.shape != (self.n,) or not np.all(np.isfinite(xf)):
            raise InvalidInputError("feasible_point must be a finite vector of length n")
        self.feasible_point = xf
        if self.forced_zero is not None:
            fz = np.asarray(self.forced_zero, dtype=bool).ravel()
            if fz.shape != (j.size,):
                raise InvalidInputError("forced_zero mask must have one flag per sparse index")
            self.forced_zero = fz
        ok, rep = is_feasible(self, xf, tol=SUPPORT_TOL)
        if not ok:
            raise InvalidInputError(f"feasible_point fails the feasibility check: {rep}")

    def project(self, x):
        return x if self.projection is None else self.projection(x)


@dataclass
class FeasibilityReport:
    inequality_violation: float
    equality_violation: float
    set_distance: float
    cardinality: Optional[int]
    cardinality_ok: bool


@dataclass
class PenaltyValue:
    """Penalty split so that total = objective_part + rho*infeasibility_part + l0_part."""

    total: float
    objective_part: float
    infeasibility_part: float
    l0_part: float


@dataclass
class KktReport:
    stationarity_residual: float
    complementarity_residual: float
    sign_violation: float
    z_support_violation: float
    feasibility_residual: float


def _oracle_values(problem, x):
    g = jg = h = jh = None
    if problem.inequality is not None:
        g, jg = problem.inequality(x)
        g = np.asarray(g, dtype=float).ravel()
    if problem.equality is not None:
        h, jh = problem.equality(x)
        h = np.asarray(h, dtype=float).ravel()
    return g, jg, h, jh


def _penalty_value(problem, x, y, rho, nu):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    j = problem.sparse_indices
    if y.shape != (j.size,):
        raise InvalidInputError(f"copy variable must have length {j.size}, got {y.shape}")
    if rho <= 0 or not np.isfinite(rho):
        raise InvalidInputError(f"penalty weight must be positive, got {rho}")
    f, _ = problem.objective(x)
    f = float(f)
    g, _, h, _ = _oracle_values(problem, x)
    inf_part = 0.0
    if g is not None:
        gp = np.maximum(g, 0.0)
        inf_part += 0.5 * float(gp @ gp)
    if h is not None:
        inf_part += 0.5 * float(h @ h)
    d = x[j] - y
    inf_part += 0.5 * float(d @ d)
    l0 = 0.0 if nu == 0.0 else nu * l0_count(y)
    total = f + rho * inf_part + l0
    if not np.isfinite(total):
        raise NumericError("penalty evaluation produced a non-finite value")
    return PenaltyValue(total=total, objective_part=f, infeasibility_part=inf_part, l0_part=l0)


def eval_q_penalty(problem, x, y, rho):
    """Quadratic penalty for the cardinality-constrained form (no l0 term)."""
    return _penalty_value(problem, x, y, rho, 0.0)


def eval_p_penalty(problem, x, y, rho):
    """Penalty for the l0-regularized form: q_rho plus nu*||y||_0."""
    if not isinstance(problem.mode, Regularized):
        raise InvalidInputError("eval_p_penalty requires a Regularized-mode problem")
    return _penalty_value(problem, x, y, rho, problem.mode.nu)


def grad_x_penalty(problem, x, y, rho):
    """Gradient of q_rho in x (the l0 term is constant in x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    j = problem.sparse_indices
    _, grad = problem.objective(x)
    grad = np.asarray(grad, dtype=float).copy()
    g, jg, h, jh = _oracle_values(problem, x)
    if g is not None:
        gp = np.maximum(g, 0.0)
        grad += rho * (np.asarray(jg, dtype=float).T @ gp)
    if h is not None:
        grad += rho * (np.asarray(jh, dtype=float).T @ h)
    if j.size:
        grad[j] += rho * (x[j] - y)
    if not np.all(np.isfinite(grad)):
        raise NumericError("penalty gradient is non-finite")
    return grad


def projected_gradient_residual(problem, x, y, rho):
    """||P_X(x - grad q_rho(x, y)) - x||, the inner stationarity measure."""
    x = np.asarray(x, dtype=float)
    step = problem.project(x - grad_x_penalty(problem, x, y, rho))
    return float(np.linalg.norm(step - x))


def is_feasible(problem, x, tol=SUPPORT_TOL):
    """Check x against g/h/X and, in Cardinality mode, the budget.

    Nonzeros are counted above max(tol, SUPPORT_TOL) so that a point that
    is feasible "at tolerance tol" in the constraint sense is also allowed
    tol-sized residue on the zero coordinates.
    """
    x = np.asarray(x, dtype=float)
    g, _, h, _ = _oracle_values(problem, x)
    g_viol = float(np.max(np.maximum(g, 0.0), initial=0.0)) if g is not None else 0.0
    h_viol = float(np.max(np.abs(h), initial=0.0)) if h is not None else 0.0
    dist = float(np.linalg.norm(problem.project(x) - x))
    if problem.sparsity_count is not None:
        count = int(problem.sparsity_count(x, max(tol, SUPPORT_TOL)))
    else:
        count = l0_count(x[problem.sparse_indices], max(tol, SUPPORT_TOL))
    card_ok = count <= problem.mode.r if isinstance(problem.mode, Cardinality) else True
    ok = max(g_viol, h_viol, dist) <= tol and card_ok
    return ok, FeasibilityReport(
        inequality_violation=g_viol,
        equality_violation=h_viol,
        set_distance=dist,
        cardinality=count,
        cardinality_ok=card_ok,
    )


def kkt_residual(problem, x, lam, mu, varpi, support_tol=SUPPORT_TOL):
    """First-order residuals for an assembled multiplier estimate.

    The copy-constraint multiplier varpi (one entry per J position) is
    scattered into an n-vector z on the inactive part of J only; theory
    puts the sparsity multiplier on the zeroed coordinates, and any mass
    varpi carries on the active support is reported separately as
    z_support_violation.
    """
    x = np.asarray(x, dtype=float)
    j = problem.sparse_indices
    varpi = np.asarray(varpi, dtype=float).ravel()
    if varpi.shape != (j.size,):
        raise InvalidInputError("varpi must have one entry per sparse index")
    lam = np.asarray(lam, dtype=float).ravel()
    mu = np.asarray(mu, dtype=float).ravel()

    _, grad = problem.objective(x)
    grad_lag = np.asarray(grad, dtype=float).copy()
    g, jg, h, jh = _oracle_values(problem, x)
    comp = 0.0
    sign_viol = 0.0
    if g is not None:
        if lam.shape != g.shape:
            raise InvalidInputError("lambda must have one entry per inequality")
        grad_lag += np.asarray(jg, dtype=float).T @ lam
        comp = float(np.max(np.abs(lam * g), initial=0.0))
        sign_viol = max(0.0, -float(np.min(lam, initial=0.0)))
    elif lam.size:
        raise InvalidInputError("lambda given but the problem has no inequalities")
    if h is not None:
        if mu.shape != h.shape:
            raise InvalidInputError("mu must have one entry per equality")
        grad_lag += np.asarray(jh, dtype=float).T @ mu
    elif mu.size:
        raise InvalidInputError("mu given but the problem has no equalities")

    active = np.abs(x[j]) > support_tol if j.size else np.zeros(0, dtype=bool)
    z = np.zeros(problem.n)
    if j.size:
        inactive = ~active
        z[j[inactive]] = varpi[inactive]
    grad_lag += z
    stationarity = float(np.linalg.norm(problem.project(x - grad_lag) - x))
    z_viol = float(np.max(np.abs(varpi[active]), initial=0.0)) if j.size else 0.0

    g_viol = float(np.max(np.maximum(g, 0.0), initial=0.0)) if g is not None else 0.0
    h_viol = float(np.max(np.abs(h), initial=0.0)) if h is not None else 0.0
    dist = float(np.linalg.norm(problem.project(x) - x))
    return KktReport(
        stationarity_residual=stationarity,
        complementarity_residual=comp,
        sign_violation=sign_viol,
        z_support_violation=z_viol,
        feasibility_residual=max(g_viol, h_viol, dist),
    )
