import itertools

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


def finite_difference_gradient(fun, x, h=1e-6):
    """Central-difference gradient, one coordinate at a time."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def brute_force_budgeted(value_at_zero, value_at_min, eligible, r):
    """Exact optimum of a separable budgeted-l0 problem by support enumeration."""
    n = len(value_at_zero)
    base = float(np.sum(value_at_zero))
    best = base
    idx = [i for i in range(n) if eligible[i]]
    for k in range(1, min(r, len(idx)) + 1):
        for s in itertools.combinations(idx, k):
            val = base + sum(value_at_min[i] - value_at_zero[i] for i in s)
            best = min(best, val)
    return best


def brute_force_regularized(value_at_zero, value_at_min, minimizer, eligible, nu):
    """Exact optimum of a separable nu*l0 problem by support enumeration."""
    n = len(value_at_zero)
    best = float(np.sum(value_at_zero))
    idx = [i for i in range(n) if eligible[i]]
    for k in range(1, len(idx) + 1):
        for s in itertools.combinations(idx, k):
            val = float(np.sum(value_at_zero))
            for i in s:
                val += value_at_min[i] - value_at_zero[i]
                if minimizer[i] != 0.0:
                    val += nu
            best = min(best, val)
    return best


def random_spd(rng, n, shift=None):
    m = rng.standard_normal((n, n))
    s = m @ m.T
    if shift is None:
        shift = 0.1 * n
    return s + shift * np.eye(n)
