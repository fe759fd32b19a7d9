"""Outer penalty loop: convergence, safeguard, multipliers, reporting."""

import numpy as np
import pytest

from pdsparse import model
from pdsparse.bcd import RESIDUAL, BcdConfig
from pdsparse.driver import (
    PdConfig,
    compute_upsilon,
    extract_multipliers,
    pd_solve_constrained,
    pd_solve_regularized,
)
from pdsparse.errors import InvalidInputError


def least_squares_problem(b, mode, offset=0.0, j=None):
    """f(x) = 0.5 ||x - b||^2 + offset with an exact penalized x-step."""
    b = np.asarray(b, dtype=float)
    n = b.size
    j = np.arange(n) if j is None else np.asarray(j, dtype=int)

    def objective(x):
        return 0.5 * float((x - b) @ (x - b)) + offset, x - b

    problem = model.SparsityProblem(
        objective=objective,
        n=n,
        sparse_indices=j,
        mode=mode,
        feasible_point=np.zeros(n),
    )

    def x_step(x, y, rho):
        out = b.copy()
        out[j] = (b[j] + rho * y) / (1.0 + rho)
        return out

    return problem, x_step


def scalar_constrained_problem(constraint):
    """f(x) = (x - 2)^2 / 2 pushed against x <= 1 (or x = 1), no sparsity."""

    def objective(x):
        return 0.5 * (x[0] - 2.0) ** 2, np.array([x[0] - 2.0])

    def side(x):
        return np.array([x[0] - 1.0]), np.array([[1.0]])

    kwargs = {constraint: side}
    problem = model.SparsityProblem(
        objective=objective,
        n=1,
        sparse_indices=np.zeros(0, dtype=int),
        mode=model.Cardinality(0),
        feasible_point=np.array([0.5 if constraint == "inequality" else 1.0]),
        **kwargs,
    )

    def x_step(x, y, rho):
        # exact minimizer of (x-2)^2/2 + rho/2 (x-1)_+^2 sits right of 1
        return np.array([(2.0 + rho) / (1.0 + rho)])

    return problem, x_step


def tight_config(**kwargs):
    defaults = dict(bcd=BcdConfig(iterate_change_tol=1e-9))
    defaults.update(kwargs)
    return PdConfig(**defaults)


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(rho0=0.0),
            dict(rho0=-1.0),
            dict(sigma=1.0),
            dict(outer_tol=0.0),
            dict(max_outer_iters=0),
            dict(residual_decay=1.5),
            dict(residual_tol0=-1.0),
            dict(residual_floor=0.0),
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(InvalidInputError):
            PdConfig(**kwargs)

    def test_mode_mismatch(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(1))
        with pytest.raises(InvalidInputError):
            pd_solve_regularized(problem, x_step, tight_config())
        reg, x_step_reg = least_squares_problem(np.array([3.0, 0.1]), model.Regularized(0.5))
        with pytest.raises(InvalidInputError):
            pd_solve_constrained(reg, x_step_reg, tight_config())

    def test_rejects_wrong_copy_length(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(1))
        with pytest.raises(InvalidInputError):
            pd_solve_constrained(problem, x_step, tight_config(), y0=np.zeros(3))


class TestBudgetedLeastSquares:
    def test_keeps_dominant_coordinate(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(1))
        report = pd_solve_constrained(problem, x_step, tight_config())
        assert report.converged
        assert report.feasible
        assert report.gap_inf <= 1e-4
        assert report.y[1] == 0.0
        assert np.count_nonzero(report.y) == 1
        assert report.x_sparse == pytest.approx([3.0, 0.0], abs=1e-3)
        # dense x honors the budget only approximately; its small tail
        # sits below the outer tolerance
        assert abs(report.x[1]) <= 1e-4

    def test_full_budget_converges_in_one_stage(self):
        b = np.array([3.0, 0.1])
        problem, x_step = least_squares_problem(b, model.Cardinality(2))
        report = pd_solve_constrained(problem, x_step, tight_config())
        assert report.converged
        assert report.outer_iterations == 1
        assert report.x == pytest.approx(b, abs=1e-6)
        assert report.gap_inf == 0.0  # copy step duplicates x exactly

    def test_zero_budget_drives_x_to_zero(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(0))
        report = pd_solve_constrained(problem, x_step, tight_config())
        assert report.converged
        assert report.feasible
        assert np.count_nonzero(report.y) == 0
        assert np.max(np.abs(report.x)) <= 1e-4

    def test_gap_history_decays(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(1))
        report = pd_solve_constrained(problem, x_step, tight_config())
        gaps = [rec.gap_inf for rec in report.history]
        assert all(g2 <= g1 + 1e-12 for g1, g2 in zip(gaps, gaps[1:]))
        assert gaps[-1] <= 1e-4 < gaps[0]

    def test_rho_grows_geometrically(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(1))
        cfg = tight_config(rho0=0.5, sigma=2.0)
        report = pd_solve_constrained(problem, x_step, cfg)
        for k, rec in enumerate(report.history):
            assert rec.rho == pytest.approx(0.5 * 2.0**k, rel=1e-12)
        assert report.rho_final == pytest.approx(report.history[-1].rho)

    def test_explicit_warm_start_accepted(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(1))
        report = pd_solve_constrained(
            problem, x_step, tight_config(), y0=np.array([3.0, 0.0])
        )
        assert report.converged
        assert report.x_sparse == pytest.approx([3.0, 0.0], abs=1e-3)


class TestRegularizedLeastSquares:
    def test_zero_weight_keeps_everything(self):
        b = np.array([3.0, 0.1])
        problem, x_step = least_squares_problem(b, model.Regularized(0.0))
        report = pd_solve_regularized(problem, x_step, tight_config())
        assert report.converged
        assert report.outer_iterations == 1
        assert report.x == pytest.approx(b, abs=1e-6)

    def test_huge_weight_zeroes_everything(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Regularized(1e6))
        report = pd_solve_regularized(problem, x_step, tight_config())
        assert report.converged
        assert np.count_nonzero(report.y) == 0
        assert np.max(np.abs(report.x)) <= 1e-4

    def test_moderate_weight_drops_small_coordinate(self):
        # keeping coordinate i is worth 0.5 b_i^2 against a charge of nu
        b = np.array([3.0, 0.1])
        problem, x_step = least_squares_problem(b, model.Regularized(0.5))
        report = pd_solve_regularized(problem, x_step, tight_config())
        assert report.converged
        assert report.x_sparse == pytest.approx([3.0, 0.0], abs=1e-3)


class TestMultipliers:
    def test_formulas_from_penalty_terms(self):
        def objective(x):
            return 0.5 * float(x @ x), x.copy()

        def inequality(x):
            return np.array([x[0] - 1.0, -x[1] - 4.0]), np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])

        def equality(x):
            return np.array([x[2] - 0.25]), np.array([[0.0, 0.0, 1.0]])

        problem = model.SparsityProblem(
            objective=objective,
            n=3,
            sparse_indices=np.array([0, 2]),
            mode=model.Cardinality(2),
            feasible_point=np.array([0.0, 0.0, 0.25]),
            inequality=inequality,
            equality=equality,
        )
        x = np.array([2.0, 1.0, -0.5])
        y = np.array([1.5, -0.5])
        lam, mu, varpi = extract_multipliers(problem, x, y, rho=2.5)
        assert lam == pytest.approx([2.5 * 1.0, 0.0])  # negative part clamped
        assert mu == pytest.approx([2.5 * -0.75])
        assert varpi == pytest.approx([2.5 * 0.5, 0.0])  # x[2] already matches y[1]

    def test_inequality_multiplier_approaches_kkt_value(self):
        # the split gap is identically zero here, so termination has to
        # wait for the inequality itself; lam = rho (x-1) -> 1 as x -> 1
        problem, x_step = scalar_constrained_problem("inequality")
        report = pd_solve_constrained(problem, x_step, tight_config())
        assert report.converged
        assert report.outer_iterations > 1
        assert report.feasibility.inequality_violation <= 1e-4
        assert report.lam[0] == pytest.approx(1.0, abs=1.1e-4)
        assert report.kkt.complementarity_residual <= 1.1e-4
        assert report.kkt.sign_violation == 0.0
        assert report.feasible

    def test_equality_multiplier_approaches_kkt_value(self):
        problem, x_step = scalar_constrained_problem("equality")
        report = pd_solve_constrained(problem, x_step, tight_config())
        assert report.converged
        assert report.feasibility.equality_violation <= 1e-4
        assert report.mu[0] == pytest.approx(1.0, abs=1.1e-4)


class TestSafeguard:
    def test_hostile_margin_forces_resets(self):
        # an impossible bound makes every stage reset its copy variable;
        # the run still terminates and the copy still honors the budget,
        # but no solution-quality claim survives constant resets
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(1))
        report = pd_solve_constrained(problem, x_step, tight_config(upsilon_margin=-1e9))
        assert len(report.history) >= 2
        assert all(rec.safeguard_triggered for rec in report.history[:-1])
        assert not report.history[-1].safeguard_triggered  # nothing ran after it
        assert np.count_nonzero(report.y) <= 1

    def test_normal_run_never_triggers(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(1))
        report = pd_solve_constrained(problem, x_step, tight_config())
        assert not any(rec.safeguard_triggered for rec in report.history)

    def test_upsilon_closed_form(self):
        # one exact x-step from y0 = 0 at rho0 = 1 gives x = 1 and penalty
        # value 1.0; the feasible objective f(0) = 2 dominates
        problem, _ = least_squares_problem(np.array([2.0]), model.Cardinality(0))

        def x_step(x, y, rho):
            return np.array([(2.0 + rho * y[0]) / (1.0 + rho)])

        up = compute_upsilon(problem, np.zeros(1), 1.0, x_step)
        assert up == pytest.approx(2.0, abs=1e-12)
        assert compute_upsilon(problem, np.zeros(1), 1.0, x_step, margin=0.5) == pytest.approx(2.5)


class TestInnerSchedule:
    def test_residual_criterion_drives_inner_loop(self):
        problem, x_step = least_squares_problem(np.array([3.0, 0.1]), model.Cardinality(0))
        cfg = PdConfig(bcd=BcdConfig(residual_tol=1.0))  # placeholder; schedule overrides
        report = pd_solve_constrained(problem, x_step, cfg)
        assert report.converged
        # y never moves with a zero budget, so one exact x-step per stage
        # reaches stationarity immediately
        for rec in report.history:
            assert rec.terminated_by == RESIDUAL
            assert rec.inner_iterations == 1
        assert report.final_residual <= max(0.1 * 0.5 ** (len(report.history) - 1), 1e-8)


class TestScaledOuterCriterion:
    def test_large_objective_scales_the_gap_test(self):
        b = np.array([3.0, 0.1])
        plain_problem, x_step = least_squares_problem(b, model.Cardinality(1))
        plain = pd_solve_constrained(plain_problem, x_step, tight_config())

        lifted_problem, x_step_lift = least_squares_problem(
            b, model.Cardinality(1), offset=1e6
        )
        scaled = pd_solve_constrained(
            lifted_problem, x_step_lift, tight_config(outer_scaled=True)
        )
        assert scaled.converged
        assert scaled.outer_iterations < plain.outer_iterations

    def test_x_sparse_uses_partial_block(self):
        # J covers only the second coordinate; the first passes through
        problem, x_step = least_squares_problem(
            np.array([5.0, 0.3]), model.Cardinality(0), j=np.array([1])
        )
        report = pd_solve_constrained(problem, x_step, tight_config())
        assert report.converged
        assert report.x_sparse[0] == report.x[0] == pytest.approx(5.0)
        assert report.x_sparse[1] == 0.0
