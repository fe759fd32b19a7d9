"""Seeded random instances for the three experiment families.

Each generator is a pure function of its arguments: the same seed gives
bit-identical data.  Randomness flows through named streams (see rng) so
adding a draw to one part of a recipe never shifts another.
"""

import numpy as np

from . import rng
from .applications import CovselInstance, CsInstance, LogisticDataset
from .errors import InvalidInputError
from .linalg import inverse_spd, orthonormalize_rows, sym_eig


def gen_cs_instance(n, p, r, seed, orthonormal=False):
    """Gaussian measurement matrix and a planted r-sparse signal.

    The matrix is n x p standard normal (row-orthonormalized on request),
    the signal has r standard normal entries at uniformly random
    positions, and the observation is exactly a @ u.
    """
    if not 1 <= r <= n <= p:
        raise InvalidInputError(f"gen_cs_instance: need 1 <= r <= n <= p, got r={r}, n={n}, p={p}")
    a = rng.gaussians(rng.stream(seed, "cs-instance", "matrix"), (n, p))
    if orthonormal:
        a = orthonormalize_rows(a)
    support = rng.sample_without_replacement(rng.stream(seed, "cs-instance", "support"), p, r)
    u = np.zeros(p)
    u[support] = rng.gaussians(rng.stream(seed, "cs-instance", "signal"), r)
    return CsInstance(a, a @ u, truth=u)


def gen_logistic_instance(n, p, seed):
    """Balanced two-class data with uniformly drawn class means.

    Each feature's positive-class mean is uniform on [0, 1] and its
    negative-class mean uniform on [-1, 0], drawn once per feature;
    samples are unit-variance normals around the class mean.
    """
    if n < 2 or n % 2:
        raise InvalidInputError(f"gen_logistic_instance: n must be positive and even, got {n}")
    if p < 1:
        raise InvalidInputError(f"gen_logistic_instance: need p >= 1, got {p}")
    half = n // 2
    mu_pos = rng.uniforms(rng.stream(seed, "logistic", "mu+"), p, 0.0, 1.0)
    mu_neg = rng.uniforms(rng.stream(seed, "logistic", "mu-"), p, -1.0, 0.0)
    noise = rng.gaussians(rng.stream(seed, "logistic", "noise"), (n, p))
    features = np.vstack([mu_pos + noise[:half], mu_neg + noise[half:]])
    outcomes = np.concatenate([np.ones(half), -np.ones(half)])
    return LogisticDataset.from_features(features, outcomes)


def _pm1_precision(p, pairs, gen_support, gen_diag):
    """Ground-truth precision matrix: near-unit diagonal, +-1 pairs.

    Positive definiteness is not automatic with off-diagonal entries of
    unit size, so the diagonal is boosted in steps until a Cholesky-style
    eigenvalue check passes.
    """
    flat = rng.sample_without_replacement(gen_support, p * (p - 1) // 2, pairs)
    iu = np.triu_indices(p, 1)
    rows, cols = iu[0][flat], iu[1][flat]
    signs = np.where(gen_support.random(pairs) < 0.5, -1.0, 1.0)
    m = np.zeros((p, p))
    m[rows, cols] = signs
    m[cols, rows] = signs
    diag = 1.0 + rng.uniforms(gen_diag, p, 0.0, 0.2)
    for boost in range(20):
        np.fill_diagonal(m, diag + 0.25 * boost)
        if sym_eig(m).values[0] > 1e-8:
            return m
    raise InvalidInputError("gen_covsel_instance: could not reach positive definiteness in 20 diagonal boosts")


def _dense_precision(p, density, gen_support, gen_values):
    """Ground-truth precision at the requested off-diagonal density.

    Off-diagonal values are uniform on [-1, 1]; the diagonal is one plus
    the row absolute sum, which forces strict diagonal dominance.
    """
    total = p * (p - 1) // 2
    count = int(round(density * total))
    m = np.zeros((p, p))
    if count:
        flat = rng.sample_without_replacement(gen_support, total, count)
        iu = np.triu_indices(p, 1)
        rows, cols = iu[0][flat], iu[1][flat]
        vals = rng.uniforms(gen_values, count, -1.0, 1.0)
        m[rows, cols] = vals
        m[cols, rows] = vals
    np.fill_diagonal(m, 1.0 + np.sum(np.abs(m), axis=1))
    return m


def gen_covsel_instance(p, density=0.1, tau=0.15, vartheta=1e-4, seed=0,
                        pattern="dense-random", pm1_pairs=None):
    """Sample covariance around a sparse ground-truth precision matrix.

    The true covariance is the inverse of a sparse precision matrix built
    per `pattern`; the sample covariance is that covariance plus a
    symmetric uniform perturbation of size tau, shifted to keep its
    smallest eigenvalue at least vartheta.  Pairs where the precision is
    zero and |i - j| >= floor(p / 2) are pinned (the omega set); at full
    density omega is empty.
    """
    if p < 2:
        raise InvalidInputError(f"gen_covsel_instance: need p >= 2, got {p}")
    if not 0.0 < density <= 1.0:
        raise InvalidInputError(f"gen_covsel_instance: density must be in (0, 1], got {density}")
    if tau < 0 or vartheta <= 0:
        raise InvalidInputError("gen_covsel_instance: need tau >= 0 and vartheta > 0")

    if pattern == "dense-random":
        precision = _dense_precision(
            p, density,
            rng.stream(seed, "covsel", "support"),
            rng.stream(seed, "covsel", "values"),
        )
    elif pattern == "pm1-sparse":
        pairs = int(round(0.4 * p)) if pm1_pairs is None else int(pm1_pairs)
        if not 0 <= pairs <= p * (p - 1) // 2:
            raise InvalidInputError(f"gen_covsel_instance: pm1_pairs out of range, got {pairs}")
        precision = _pm1_precision(
            p, pairs,
            rng.stream(seed, "covsel", "support"),
            rng.stream(seed, "covsel", "diag"),
        )
    else:
        raise InvalidInputError(f"gen_covsel_instance: unknown pattern {pattern!r}")

    covariance = inverse_spd(precision)
    # symmetrized uniform square: off-diagonal entries average two draws
    m = rng.uniforms(rng.stream(seed, "covsel", "perturbation"), (p, p), -1.0, 1.0)
    v = 0.5 * (m + m.T)
    b = covariance + tau * v
    lam_min = float(sym_eig(b).values[0])
    sigma_hat = b - min(lam_min - vartheta, 0.0) * np.eye(p)

    cut = p // 2
    omega = frozenset(
        (i, j)
        for i in range(p)
        for j in range(p)
        if i != j and precision[i, j] == 0.0 and abs(i - j) >= cut
    )
    meta = {"pattern": pattern, "density": density, "tau": tau, "vartheta": vartheta,
            "offdiag_nnz": int(np.count_nonzero(precision) - p)}
    return CovselInstance(sigma_hat, omega=omega, truth=precision, meta=meta)
