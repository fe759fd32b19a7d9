"""Closed-form solvers for separable l0 subproblems.

Each coordinate i carries a piece phi_i with known value at zero, known
unconstrained-over-X_i minimizer and value there.  Keeping coordinate i
saves phi_i(0) - phi_i(x~_i) >= 0; the budgeted problem keeps the r
largest savings, the regularized one keeps a coordinate iff its saving
covers the per-coordinate charge nu.  Ties always resolve to the lowest
index, and coordinates can be pinned to zero via a mask.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError

_SAVINGS_SLACK = 1e-12


def _as_mask(forced_zero, n):
    if forced_zero is None:
        return np.zeros(n, dtype=bool)
    forced_zero = np.asarray(forced_zero)
    if forced_zero.dtype == bool:
        if forced_zero.shape != (n,):
            raise InvalidInputError("forced_zero mask has wrong length")
        return forced_zero
    mask = np.zeros(n, dtype=bool)
    idx = forced_zero.astype(int).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise InvalidInputError("forced_zero indices out of range")
    mask[idx] = True
    return mask


@dataclass
class SeparablePieces:
    """Per-coordinate data (phi_i(0), argmin phi_i, min phi_i) plus pins."""

    value_at_zero: np.ndarray
    minimizer: np.ndarray
    value_at_minimizer: np.ndarray
    forced_zero: Optional[np.ndarray] = None

    def __post_init__(self):
        v0 = np.asarray(self.value_at_zero, dtype=float).ravel()
        xm = np.asarray(self.minimizer, dtype=float).ravel()
        vm = np.asarray(self.value_at_minimizer, dtype=float).ravel()
        if not (v0.shape == xm.shape == vm.shape):
            raise InvalidInputError("piece arrays must share one length")
        if not (np.all(np.isfinite(v0)) and np.all(np.isfinite(xm)) and np.all(np.isfinite(vm))):
            raise InvalidInputError("piece arrays must be finite")
        slack = _SAVINGS_SLACK * (1.0 + np.abs(v0))
        if np.any(vm > v0 + slack):
            raise InvalidInputError("value_at_minimizer exceeds value_at_zero: not a minimizer")
        self.value_at_zero = v0
        self.minimizer = xm
        self.value_at_minimizer = vm
        self.forced_zero = _as_mask(self.forced_zero, v0.size)

    @property
    def size(self):
        return self.value_at_zero.size


@dataclass
class ThresholdResult:
    x: np.ndarray
    selected: np.ndarray  # kept coordinates, ascending
    savings: np.ndarray  # per-coordinate saving used for the selection


def _select_top(keys, eligible, r):
    """Indices of the r largest keys among eligible; ties -> lowest index."""
    elig = np.flatnonzero(eligible)
    order = elig[np.argsort(-keys[elig], kind="stable")]
    return order[: min(r, elig.size)]


def solve_cardinality_separable(pieces, r):
    """min sum phi_i(x_i) s.t. ||x||_0 <= r, with pinned coordinates at 0.

    Keeps the r largest savings v_i = phi_i(0) - phi_i(x~_i); a budget
    exceeding the eligible count is silently clamped.
    """
    if int(r) != r or r < 0:
        raise InvalidInputError(f"budget must be a nonnegative integer, got {r}")
    savings = pieces.value_at_zero - pieces.value_at_minimizer
    keep = _select_top(savings, ~pieces.forced_zero, int(r))
    x = np.zeros(pieces.size)
    x[keep] = pieces.minimizer[keep]
    return ThresholdResult(x=x, selected=np.sort(keep), savings=savings)


def solve_l0_regularized_separable(pieces, nu):
    """min sum phi_i(x_i) + nu*||x||_0, pinned coordinates at 0.

    Coordinate i is kept iff phi_i(0) - nu - phi_i(x~_i) >= 0; the boundary
    case keeps the coordinate (nonzero representative of the tie).
    """
    if not np.isfinite(nu) or nu < 0:
        raise InvalidInputError(f"l0 weight must be a nonnegative real, got {nu}")
    savings = pieces.value_at_zero - nu - pieces.value_at_minimizer
    keep = np.flatnonzero((savings >= 0.0) & ~pieces.forced_zero)
    x = np.zeros(pieces.size)
    x[keep] = pieces.minimizer[keep]
    return ThresholdResult(x=x, selected=keep, savings=savings)


def hard_threshold_top_r(c, r, forced_zero=None):
    """Quadratic specialization of the budgeted problem: keep the r largest
    |c_i| (ties -> lowest index), zero the rest.  Independent of the
    penalty weight since every piece is (rho/2)(t - c_i)^2."""
    c = np.asarray(c, dtype=float).ravel()
    if int(r) != r or r < 0:
        raise InvalidInputError(f"budget must be a nonnegative integer, got {r}")
    mask = _as_mask(forced_zero, c.size)
    keep = _select_top(np.abs(c), ~mask, int(r))
    x = np.zeros_like(c)
    x[keep] = c[keep]
    return x


def hard_threshold_nu(c, nu, rho, forced_zero=None):
    """Quadratic specialization of the regularized problem: keep c_i iff
    (rho/2) c_i^2 >= nu, i.e. |c_i| >= sqrt(2 nu / rho); boundary kept."""
    c = np.asarray(c, dtype=float).ravel()
    if not np.isfinite(nu) or nu < 0:
        raise InvalidInputError(f"l0 weight must be a nonnegative real, got {nu}")
    if not np.isfinite(rho) or rho <= 0:
        raise InvalidInputError(f"penalty weight must be positive, got {rho}")
    mask = _as_mask(forced_zero, c.size)
    keep = (0.5 * rho * c * c >= nu) & ~mask
    x = np.zeros_like(c)
    x[keep] = c[keep]
    return x
