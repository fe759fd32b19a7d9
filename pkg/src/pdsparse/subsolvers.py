"""Inner solvers used by the block-descent x-step.

- spg_minimize: nonmonotone spectral projected gradient for smooth
  objectives over a projectable convex set,
- cg_solve: conjugate gradients for SPD operators,
- AffineProjector: exact Euclidean projection onto {x : A x = b} with a
  cached Gram factorization,
- logdet_prox: exact prox of -log det over the SPD cone.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import linalg
from .errors import InvalidInputError, NotPositiveDefiniteError, NumericError


@dataclass
class SpgConfig:
    tol: float = 1e-4
    max_iters: int = 5000
    memory: int = 2  # nonmonotone window M
    step_min: float = 1e-10
    step_max: float = 1e10
    sufficient_decrease: float = 1e-4  # Armijo gamma
    backtrack: float = 0.5
    record_history: bool = False

    def __post_init__(self):
        if self.tol <= 0 or self.max_iters < 1 or self.memory < 1:
            raise InvalidInputError("spg: tol, max_iters and memory must be positive")
        if not 0 < self.backtrack < 1 or not 0 < self.sufficient_decrease < 1:
            raise InvalidInputError("spg: backtrack and sufficient_decrease must lie in (0,1)")
        if not 0 < self.step_min < self.step_max:
            raise InvalidInputError("spg: need 0 < step_min < step_max")


@dataclass
class SpgResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool
    history: Optional[List[float]] = None


def spg_minimize(fun_grad, project, x0, config=None):
    """Minimize smooth F over a convex set given by its projection.

    fun_grad(x) -> (F, grad).  Stops when the projected-gradient residual
    satisfies ||P(x - grad) - x|| <= tol * max(|F|, 1).  Line search is
    the nonmonotone Armijo rule over the last `memory` values with simple
    halving; steps come from the safeguarded Barzilai-Borwein quotient.
    On an exhausted budget the best iterate found is returned flagged
    converged=False.
    """
    config = config or SpgConfig()
    x = project(np.asarray(x0, dtype=float))
    f, g = fun_grad(x)
    f = float(f)
    g = np.asarray(g, dtype=float)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise NumericError("spg: non-finite objective or gradient at the start")

    recent = [f]
    history = [f] if config.record_history else None
    best_x, best_f = x.copy(), f

    pg = project(x - g) - x
    pg_norm = float(np.linalg.norm(pg, np.inf))
    alpha = 1.0 if pg_norm == 0.0 else min(config.step_max, max(config.step_min, 1.0 / pg_norm))

    for it in range(1, config.max_iters + 1):
        if float(np.linalg.norm(project(x - g) - x)) <= config.tol * max(abs(f), 1.0):
            return SpgResult(x=x, value=f, iterations=it - 1, converged=True, history=history)

        d = project(x - alpha * g) - x
        gtd = float(g @ d)
        if gtd > 0.0:  # fall back to the raw projected direction
            d = project(x - g) - x
            gtd = float(g @ d)
        f_ref = max(recent)
        lam = 1.0
        while True:
            x_new = x + lam * d
            f_new, g_new = fun_grad(x_new)
            f_new = float(f_new)
            if np.isfinite(f_new) and f_new <= f_ref + config.sufficient_decrease * lam * gtd:
                break
            lam *= config.backtrack
            if lam < 1e-30:
                # direction numerically exhausted; stop at the incumbent
                return SpgResult(
                    x=best_x, value=best_f, iterations=it, converged=False, history=history
                )
        g_new = np.asarray(g_new, dtype=float)
        if not np.all(np.isfinite(g_new)):
            raise NumericError("spg: non-finite gradient")

        s = x_new - x
        yv = g_new - g
        sty = float(s @ yv)
        if sty <= 0.0:
            alpha = config.step_max
        else:
            alpha = min(config.step_max, max(config.step_min, float(s @ s) / sty))

        x, f, g = x_new, f_new, g_new
        recent.append(f)
        if len(recent) > config.memory:
            recent.pop(0)
        if config.record_history:
            history.append(f)
        if f < best_f:
            best_x, best_f = x.copy(), f

    return SpgResult(x=best_x, value=best_f, iterations=config.max_iters, converged=False, history=history)


@dataclass
class CgResult:
    x: np.ndarray
    iterations: int
    converged: bool


def cg_solve(apply_op, rhs, x0=None, tol=1e-10, max_iters=None):
    """Conjugate gradients for an SPD operator given as a matvec callable.

    Terminates when ||op(x) - rhs|| <= tol * (1 + ||rhs||).  Raises
    NotPositiveDefiniteError on a nonpositive curvature p' Q p (operator
    not SPD to working precision).
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.size
    if max_iters is None:
        max_iters = 10 * n
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    r = rhs - apply_op(x)
    target = tol * (1.0 + float(np.linalg.norm(rhs)))
    rr = float(r @ r)
    if np.sqrt(rr) <= target:
        return CgResult(x=x, iterations=0, converged=True)
    p = r.copy()
    for it in range(1, max_iters + 1):
        qp = apply_op(p)
        curv = float(p @ qp)
        if curv <= 0.0:
            raise NotPositiveDefiniteError("cg: operator has nonpositive curvature")
        step = rr / curv
        x += step * p
        r -= step * qp
        rr_new = float(r @ r)
        if np.sqrt(rr_new) <= target:
            return CgResult(x=x, iterations=it, converged=True)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return CgResult(x=x, iterations=max_iters, converged=False)


class AffineProjector:
    """Euclidean projection onto {x : A x = b} with a cached factorization.

    project(c) = c - A' (A A')^{-1} (A c - b); the Cholesky factor of the
    Gram matrix A A' is computed once.  Raises RankError-level failure
    (via NotPositiveDefiniteError) when A has dependent rows.
    """

    def __init__(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.ndim != 2 or b.shape != (a.shape[0],):
            raise InvalidInputError("AffineProjector: need A (n x p) and b of length n")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidInputError("AffineProjector: non-finite data")
        self.a = a
        self.b = b
        gram = a @ a.T
        try:
            self._factor = linalg.cholesky_factor(gram)
        except NotPositiveDefiniteError as exc:
            raise NotPositiveDefiniteError(
                "AffineProjector: A A' is singular (A not of full row rank)"
            ) from exc

    def project(self, c):
        c = np.asarray(c, dtype=float)
        resid = self.a @ c - self.b
        w = linalg.cholesky_solve(None, resid, factor=self._factor)
        return c - self.a.T @ w

    def __call__(self, c):
        return self.project(c)


def affine_project(a, b, c):
    """One-shot projection of c onto {x : A x = b}."""
    return AffineProjector(a, b).project(c)


def logdet_prox(c, rho):
    """argmin over symmetric X of -log det X + (rho/2) ||X - C||_F^2.

    With C = V diag(lam) V', each eigenvalue maps to
    (lam_i + sqrt(lam_i^2 + 4/rho)) / 2 > 0, so the result is SPD for any
    symmetric C.  Stationarity: -X^{-1} + rho (X - C) = 0.
    """
    if rho <= 0 or not np.isfinite(rho):
        raise InvalidInputError(f"logdet_prox: rho must be positive, got {rho}")
    eig = linalg.sym_eig(c)
    d = 0.5 * (eig.values + np.sqrt(eig.values**2 + 4.0 / rho))
    x = (eig.vectors * d) @ eig.vectors.T
    return 0.5 * (x + x.T)
