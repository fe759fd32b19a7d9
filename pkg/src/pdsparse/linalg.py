"""Self-contained dense linear-algebra kernels.

Symmetric eigendecomposition (cyclic Jacobi), Cholesky factor/solve,
Gram-Schmidt row orthonormalization and a pivoted-QR basic solver.
Elementwise/BLAS-level arithmetic is plain numpy; the O(n^3) scalar loops
live in `pdsparse._kernels` (compiled core with a pure-python twin).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    ConvergenceError,
    InvalidInputError,
    NotPositiveDefiniteError,
    RankError,
)

_SYM_TOL = 1e-12


def _as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def _require_symmetric(s, name="matrix"):
    s = _as_matrix(s, name)
    n, m = s.shape
    if n != m:
        raise InvalidInputError(f"{name} must be square, got {s.shape}")
    scale = np.linalg.norm(s)
    if np.linalg.norm(s - s.T) > _SYM_TOL * max(scale, 1.0):
        raise InvalidInputError(f"{name} is not symmetric")
    return s


@dataclass
class EigenDecomposition:
    """Eigenvalues ascending; `vectors[:, i]` pairs with `values[i]`."""

    values: np.ndarray
    vectors: np.ndarray


def sym_eig(s, max_sweeps=100):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Returns an EigenDecomposition with eigenvalues sorted ascending (ties
    keep the order the sweep produced).  Raises InvalidInputError for
    non-symmetric input and ConvergenceError if `max_sweeps` sweeps do not
    reduce the off-diagonal mass to rounding level.
    """
    s = _require_symmetric(s)
    n = s.shape[0]
    a = np.array(s, dtype=float, order="C", copy=True)
    v = np.eye(n, order="C")
    off_tol = 1e-14 * max(np.linalg.norm(s), np.finfo(float).tiny)
    sweeps = _kernels.jacobi_eigh(a, v, int(max_sweeps), off_tol)
    if sweeps < 0:
        raise ConvergenceError(
            f"jacobi eigensolver: off-diagonal mass not eliminated in {max_sweeps} sweeps"
        )
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values=values[order], vectors=np.ascontiguousarray(v[:, order]))


def cholesky_factor(s):
    """Lower Cholesky factor of an SPD matrix.

    Raises NotPositiveDefiniteError when some pivot is <= 0.
    """
    s = _require_symmetric(s)
    a = np.array(s, dtype=float, order="C", copy=True)
    status = _kernels.cholesky_factor(a)
    if status != 0:
        raise NotPositiveDefiniteError(
            f"cholesky: non-positive pivot at column {status - 1}"
        )
    return np.tril(a)


def cholesky_solve(s, b, factor=None):
    """Solve S X = B for SPD `s` (or a precomputed lower `factor`)."""
    if factor is None:
        factor = cholesky_factor(s)
    b = np.asarray(b, dtype=float)
    squeeze = b.ndim == 1
    x = np.array(b.reshape(b.shape[0], -1), dtype=float, order="C", copy=True)
    if x.shape[0] != factor.shape[0]:
        raise InvalidInputError(
            f"cholesky_solve: rhs has {x.shape[0]} rows, matrix is {factor.shape[0]}x{factor.shape[0]}"
        )
    _kernels.cholesky_solve_tri(np.ascontiguousarray(factor), x)
    return x[:, 0] if squeeze else x


def logdet_spd(s, factor=None):
    """log det of an SPD matrix via its Cholesky factor."""
    if factor is None:
        factor = cholesky_factor(s)
    return 2.0 * float(np.sum(np.log(np.diag(factor))))


def inverse_spd(s, factor=None):
    """Inverse of an SPD matrix (Cholesky solve against the identity)."""
    s = _require_symmetric(s)
    inv = cholesky_solve(s, np.eye(s.shape[0]), factor=factor)
    return 0.5 * (inv + inv.T)


def orthonormalize_rows(m, rank_tol=1e-10):
    """Orthonormal basis of the row space, Gram-Schmidt order preserved.

    One reorthogonalization pass keeps loss of orthogonality at rounding
    level.  Raises RankError when a row is (numerically) dependent on its
    predecessors.
    """
    m = _as_matrix(m)
    r, n = m.shape
    if r == 0 or n == 0:
        raise InvalidInputError("orthonormalize_rows: empty matrix")
    g = np.empty_like(m)
    for i in range(r):
        v = m[i].copy()
        scale = max(np.linalg.norm(v), np.finfo(float).tiny)
        for _ in range(2):  # second pass: reorthogonalize
            if i > 0:
                v -= g[:i].T @ (g[:i] @ v)
        norm = np.linalg.norm(v)
        if norm <= rank_tol * scale:
            raise RankError(f"orthonormalize_rows: row {i} is numerically dependent")
        g[i] = v / norm
    return g


def basic_solution(a, b, rank_tol=1e-10):
    """One solution of A x = b with at most n nonzeros (A is n x p, n <= p).

    Householder QR with column pivoting; the solution is supported on the
    n pivot columns, mirroring a textbook basic least-squares solve.
    Raises RankError when A is not of full row rank.
    """
    a = _as_matrix(a, "A")
    n, p = a.shape
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise InvalidInputError(f"basic_solution: b must have shape ({n},)")
    if n > p:
        raise InvalidInputError("basic_solution: A must have n <= p")

    r = np.array(a, dtype=float, copy=True)
    qtb = b.copy()
    piv = np.arange(p)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for k in range(n):
        norms = np.linalg.norm(r[k:, k:], axis=0)
        j = k + int(np.argmax(norms))
        if norms[j - k] <= rank_tol * scale:
            raise RankError("basic_solution: A is rank deficient")
        if j != k:
            r[:, [k, j]] = r[:, [j, k]]
            piv[[k, j]] = piv[[j, k]]
        x = r[k:, k]
        sign = 1.0 if x[0] >= 0 else -1.0
        alpha = -sign * np.linalg.norm(x)
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm > 0:
            v /= vnorm
            r[k:, k:] -= 2.0 * np.outer(v, v @ r[k:, k:])
            qtb[k:] -= 2.0 * v * (v @ qtb[k:])
        r[k, k] = alpha
        r[k + 1 :, k] = 0.0

    z = np.zeros(n)
    for i in range(n - 1, -1, -1):
        z[i] = (qtb[i] - r[i, i + 1 : n] @ z[i + 1 : n]) / r[i, i]
    x_full = np.zeros(p)
    x_full[piv[:n]] = z
    return x_full
