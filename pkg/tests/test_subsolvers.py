import itertools

import numpy as np
import pytest

from conftest import random_spd
from pdsparse import linalg, subsolvers
from pdsparse.errors import InvalidInputError, NotPositiveDefiniteError
from pdsparse.subsolvers import (
    AffineProjector,
    SpgConfig,
    affine_project,
    cg_solve,
    logdet_prox,
    spg_minimize,
)


def box_quadratic_optimum(q, c, lo, hi):
    """Exact minimizer of 0.5 x'Qx - c'x over [lo,hi]^n by face enumeration."""
    n = c.size
    best_x, best_f = None, np.inf
    for states in itertools.product((-1, 0, 1), repeat=n):
        x = np.zeros(n)
        fixed = [i for i, s in enumerate(states) if s != 0]
        free = [i for i, s in enumerate(states) if s == 0]
        for i in fixed:
            x[i] = lo[i] if states[i] < 0 else hi[i]
        if free:
            rhs = c[free]
            if fixed:
                rhs = rhs - q[np.ix_(free, fixed)] @ x[fixed]
            x[free] = np.linalg.solve(q[np.ix_(free, free)], rhs)
            if np.any(x[free] < lo[free] - 1e-12) or np.any(x[free] > hi[free] + 1e-12):
                continue
        f = 0.5 * x @ q @ x - c @ x
        if f < best_f:
            best_f, best_x = f, x
    return best_x, best_f


class TestSpg:
    def test_unconstrained_quadratic(self, rng):
        q = random_spd(rng, 4, shift=1.0)
        c = rng.standard_normal(4)
        res = spg_minimize(
            lambda x: (0.5 * x @ q @ x - c @ x, q @ x - c),
            lambda x: x,
            np.zeros(4),
            SpgConfig(tol=1e-10),
        )
        assert res.converged
        assert np.linalg.norm(res.x - np.linalg.solve(q, c)) <= 1e-6

    def test_logistic_scalar_vs_bisection(self):
        # F(x) = log(1 + e^{-x}) + x^2/2; F'(x) = -1/(1+e^x) + x
        def fg(x):
            t = x[0]
            f = np.logaddexp(0.0, -t) + 0.5 * t * t
            g = -1.0 / (1.0 + np.exp(t)) + t
            return f, np.array([g])

        lo, hi = 0.0, 1.0
        for _ in range(120):
            mid = 0.5 * (lo + hi)
            if -1.0 / (1.0 + np.exp(mid)) + mid < 0:
                lo = mid
            else:
                hi = mid
        root = 0.5 * (lo + hi)
        res = spg_minimize(fg, lambda x: x, np.array([5.0]), SpgConfig(tol=1e-8))
        assert abs(res.x[0] - root) <= 1e-4

    def test_box_constrained_matches_active_set(self, rng):
        for _ in range(50):
            n = 5
            q = random_spd(rng, n, shift=1.0)
            c = rng.standard_normal(n) * 2
            lo, hi = -np.ones(n) * 0.5, np.ones(n) * 0.5
            project = lambda x: np.clip(x, lo, hi)
            res = spg_minimize(
                lambda x: (0.5 * x @ q @ x - c @ x, q @ x - c),
                project,
                np.zeros(n),
                SpgConfig(tol=1e-10, max_iters=20000),
            )
            x_ref, f_ref = box_quadratic_optimum(q, c, lo, hi)
            assert res.value <= f_ref + 1e-6
            assert np.linalg.norm(res.x - x_ref) <= 1e-5 * (1 + np.linalg.norm(x_ref))

    def test_nonmonotone_window_bound(self, rng):
        # every accepted value stays within the defining nonmonotone bound
        q = random_spd(rng, 6, shift=0.5)
        c = rng.standard_normal(6)
        res = spg_minimize(
            lambda x: (0.5 * x @ q @ x - c @ x, q @ x - c),
            lambda x: np.clip(x, -1, 1),
            rng.standard_normal(6),
            SpgConfig(tol=1e-9, memory=2, record_history=True),
        )
        h = res.history
        for k in range(1, len(h)):
            window = h[max(0, k - 2) : k]
            assert h[k] <= max(window) + 1e-12 * (1 + abs(max(window)))

    def test_budget_exhaustion_flagged(self, rng):
        q = random_spd(rng, 8, shift=0.1)
        c = rng.standard_normal(8)
        res = spg_minimize(
            lambda x: (0.5 * x @ q @ x - c @ x, q @ x - c),
            lambda x: x,
            np.zeros(8),
            SpgConfig(tol=1e-14, max_iters=3),
        )
        assert not res.converged and res.iterations == 3

    def test_projects_start_point(self):
        res = spg_minimize(
            lambda x: (float(x @ x), 2 * x),
            lambda x: np.clip(x, 0.0, 1.0),
            np.array([5.0]),
            SpgConfig(tol=1e-10),
        )
        assert res.x[0] <= 1.0 + 1e-12

    def test_config_validation(self):
        with pytest.raises(InvalidInputError):
            SpgConfig(tol=0.0)
        with pytest.raises(InvalidInputError):
            SpgConfig(backtrack=1.5)


class TestCg:
    def test_identity(self, rng):
        b = rng.standard_normal(6)
        res = cg_solve(lambda v: v, b)
        assert res.converged and np.allclose(res.x, b, atol=1e-12)

    def test_matches_cholesky(self, rng):
        for n in (3, 10, 30):
            s = random_spd(rng, n)
            b = rng.standard_normal(n)
            res = cg_solve(lambda v: s @ v, b, tol=1e-12)
            assert res.converged
            assert np.allclose(res.x, linalg.cholesky_solve(s, b), atol=1e-7)

    def test_warm_start_zero_iterations(self, rng):
        s = random_spd(rng, 5)
        b = rng.standard_normal(5)
        x = linalg.cholesky_solve(s, b)
        res = cg_solve(lambda v: s @ v, b, x0=x, tol=1e-8)
        assert res.converged and res.iterations == 0

    def test_indefinite_operator(self):
        s = np.diag([1.0, -1.0])
        with pytest.raises(NotPositiveDefiniteError):
            cg_solve(lambda v: s @ v, np.array([1.0, 1.0]))

    def test_budget_flag(self, rng):
        s = random_spd(rng, 20, shift=0.01)
        res = cg_solve(lambda v: s @ v, rng.standard_normal(20), tol=1e-14, max_iters=2)
        assert not res.converged


class TestAffineProjector:
    def test_already_feasible(self, rng):
        a = rng.standard_normal((3, 8))
        x0 = rng.standard_normal(8)
        b = a @ x0
        assert np.allclose(AffineProjector(a, b).project(x0), x0, atol=1e-10)

    def test_hand_case_sum_constraint(self):
        # project (2, 0) onto {x1 + x2 = 1} -> (1.5, -0.5)
        x = affine_project(np.array([[1.0, 1.0]]), np.array([1.0]), np.array([2.0, 0.0]))
        assert np.allclose(x, [1.5, -0.5], atol=1e-14)

    def test_idempotent_and_feasible(self, rng):
        for n, p in ((2, 6), (16, 48), (64, 256)):
            a = rng.standard_normal((n, p))
            b = rng.standard_normal(n)
            proj = AffineProjector(a, b)
            c = rng.standard_normal(p)
            x = proj.project(c)
            scale = 1 + np.linalg.norm(b)
            assert np.linalg.norm(a @ x - b) <= 1e-8 * scale
            assert np.linalg.norm(proj.project(x) - x) <= 1e-8 * (1 + np.linalg.norm(x))

    def test_minimal_distance(self, rng):
        a = rng.standard_normal((4, 10))
        x_feas = rng.standard_normal(10)
        b = a @ x_feas
        proj = AffineProjector(a, b)
        c = rng.standard_normal(10)
        x = proj.project(c)
        for _ in range(20):
            z = x_feas + (np.eye(10) - a.T @ np.linalg.solve(a @ a.T, a)) @ rng.standard_normal(10)
            assert np.linalg.norm(x - c) <= np.linalg.norm(z - c) + 1e-9

    def test_dependent_rows(self):
        a = np.array([[1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(NotPositiveDefiniteError):
            AffineProjector(a, np.array([1.0, 2.0]))


class TestLogdetProx:
    def test_identity_input(self):
        # C = I, rho = 1: d = (1 + sqrt(5))/2 on both eigenvalues
        x = logdet_prox(np.eye(2), 1.0)
        golden = (1 + np.sqrt(5.0)) / 2
        assert np.allclose(x, golden * np.eye(2), atol=1e-12)

    def test_zero_input(self):
        # C = 0: X = sqrt(1/rho) I
        x = logdet_prox(np.zeros((3, 3)), 4.0)
        assert np.allclose(x, 0.5 * np.eye(3), atol=1e-12)

    def test_stationarity_random(self, rng):
        for n in (2, 10, 35):
            for rho in (0.1, 1.0, 10.0):
                m = rng.standard_normal((n, n))
                c = 0.5 * (m + m.T)
                x = logdet_prox(c, rho)
                grad = -linalg.inverse_spd(x) + rho * (x - c)
                assert np.linalg.norm(grad) <= 1e-8 * (1 + rho * np.linalg.norm(c))

    def test_output_spd(self, rng):
        m = rng.standard_normal((8, 8))
        c = 0.5 * (m + m.T) - 3 * np.eye(8)  # push eigenvalues negative
        x = logdet_prox(c, 2.0)
        assert linalg.sym_eig(x).values.min() > 0

    def test_rejects_bad_rho(self):
        with pytest.raises(InvalidInputError):
            logdet_prox(np.eye(2), 0.0)
