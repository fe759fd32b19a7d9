"""End-to-end solvers built on the penalty-decomposition driver.

Four problem families ship here: sparse logistic regression, sparse
inverse covariance selection, and compressed sensing with noiseless
(equality-constrained) and noisy (budgeted least-squares) measurements.
An iterative-hard-thresholding baseline and an explicit construction
where the l_p surrogate prefers a denser point round out the set.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import linalg, model
from .bcd import BcdConfig
from .driver import PdConfig, pd_solve_constrained, pd_solve_regularized
from .errors import (
    InvalidInputError,
    MonotonicityError,
    NotPositiveDefiniteError,
    NumericError,
    RankError,
)
from .subsolvers import AffineProjector, SpgConfig, cg_solve, logdet_prox, spg_minimize
from .thresholding import hard_threshold_top_r


def _widen_margin(config, level):
    """Give a zero safeguard margin headroom proportional to the level bound.

    Right after each weight increase the one-step penalty estimate can
    overshoot the level bound by a growth-factor transient before block
    descent re-equilibrates, and a reset on such a transient throws away
    the sparse iterate.  The overshoot scales with the bound itself, so
    the headroom does too; a genuinely lost run (penalty far above any
    transient) still trips the reset.  Configs that set a margin
    themselves pass through untouched.
    """
    if config.upsilon_margin != 0.0:
        return config
    return replace(config, upsilon_margin=5.0 * max(abs(float(level)), 1.0))


# ---------------------------------------------------------------------------
# sparse logistic regression


@dataclass
class LogisticDataset:
    """Binary-labelled training data in outcome-scaled form.

    samples holds one row per observation, already multiplied by its +-1
    outcome; the raw feature rows are outcomes[i] * samples[i].  Keeping
    the scaled form makes the loss a plain row-wise inner product.
    """

    samples: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self.outcomes = np.asarray(self.outcomes, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise InvalidInputError("LogisticDataset: samples must be a nonempty matrix")
        if self.outcomes.shape != (self.samples.shape[0],):
            raise InvalidInputError("LogisticDataset: one outcome per sample row")
        if not np.all(np.abs(self.outcomes) == 1.0):
            raise InvalidInputError("LogisticDataset: outcomes must be +-1")
        if not np.all(np.isfinite(self.samples)):
            raise InvalidInputError("LogisticDataset: non-finite samples")

    @classmethod
    def from_features(cls, features, outcomes):
        """Build from raw feature rows and +-1 outcomes."""
        outcomes = np.asarray(outcomes, dtype=float)
        return cls(outcomes[:, None] * np.asarray(features, dtype=float), outcomes)

    @property
    def features(self):
        """Raw feature rows z_i = outcomes_i * samples_i."""
        return self.outcomes[:, None] * self.samples

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def n_features(self):
        return self.samples.shape[1]


@dataclass
class LogisticModel:
    intercept: float
    weights: np.ndarray

    def __post_init__(self):
        self.intercept = float(self.intercept)
        self.weights = np.asarray(self.weights, dtype=float)
        if not (np.isfinite(self.intercept) and np.all(np.isfinite(self.weights))):
            raise InvalidInputError("LogisticModel: non-finite parameters")

    def predict(self, features):
        """One +-1 outcome per feature row; scores of exactly zero map to -1."""
        scores = np.asarray(features, dtype=float) @ self.weights + self.intercept
        return np.where(scores > 0.0, 1.0, -1.0)


def _margin_loss_grad(samples, outcomes, x):
    """Average log(1 + exp(-t)) over margins t = samples @ w + v*outcomes.

    x stacks (intercept, weights).  Evaluated as max(0,-t) + log1p(exp(-|t|))
    so that large margins of either sign cannot overflow; the slope
    -1/(1+exp(t)) comes from the matching stable branch.
    """
    margins = samples @ x[1:] + x[0] * outcomes
    e = np.exp(-np.abs(margins))
    value = float(np.mean(np.maximum(-margins, 0.0) + np.log1p(e)))
    slope = -np.where(margins >= 0.0, e / (1.0 + e), 1.0 / (1.0 + e))
    grad = np.empty(x.size)
    grad[0] = float(np.mean(slope * outcomes))
    grad[1:] = samples.T @ slope / samples.shape[0]
    return value, grad


def logistic_loss(dataset, logmodel):
    """Average logistic loss of the model on the dataset, with its gradient.

    Returns (value, grad) where grad stacks the intercept derivative ahead
    of the weight block.
    """
    x = np.concatenate(([logmodel.intercept], logmodel.weights))
    if x.size != dataset.n_features + 1:
        raise InvalidInputError("logistic_loss: model width does not match the dataset")
    return _margin_loss_grad(dataset.samples, dataset.outcomes, x)


def error_rate(logmodel, features, outcomes):
    """Percent of rows misclassified by sign(w'z + v); the boundary counts as -1."""
    outcomes = np.asarray(outcomes, dtype=float)
    pred = logmodel.predict(features)
    return 100.0 * float(np.mean(pred != outcomes))


def logistic_defaults():
    """Driver configuration used by solve_sparse_logistic when none is given."""
    return PdConfig(
        rho0=0.1,
        sigma=math.sqrt(10.0),
        outer_tol=1e-3,
        bcd=BcdConfig(iterate_change_tol=5e-4),
    )


def solve_sparse_logistic(dataset, r, config=None):
    """Fit a logistic model with at most r nonzero weights.

    The variable stacks (intercept, weights); only the weight block is
    budgeted.  Each x-step runs the spectral projected gradient on the
    smoothly penalized loss from the incumbent, so the intercept is
    always free.  Returns the model read off the exactly sparse copy.
    """
    p = dataset.n_features
    if not 1 <= r <= p:
        raise InvalidInputError(f"solve_sparse_logistic: need 1 <= r <= {p}, got {r}")
    # loss of the zero model, the feasible start
    config = _widen_margin(config or logistic_defaults(), math.log(2.0))
    samples, outcomes = dataset.samples, dataset.outcomes

    def objective(x):
        return _margin_loss_grad(samples, outcomes, x)

    problem = model.SparsityProblem(
        objective=objective,
        n=p + 1,
        sparse_indices=np.arange(1, p + 1),
        mode=model.Cardinality(r),
        feasible_point=np.zeros(p + 1),
    )

    def x_step(x, y, rho):
        def fun_grad(z):
            f, g = _margin_loss_grad(samples, outcomes, z)
            d = z[1:] - y
            g = g.copy()
            g[1:] += rho * d
            return f + 0.5 * rho * float(d @ d), g

        return spg_minimize(fun_grad, lambda z: z, x, SpgConfig()).x

    report = pd_solve_constrained(problem, x_step, config)
    xs = report.x_sparse
    return LogisticModel(xs[0], xs[1:]), report


# ---------------------------------------------------------------------------
# sparse inverse covariance selection


@dataclass
class CovselInstance:
    """Sample covariance with a forbidden off-diagonal pattern.

    omega lists (i, j) positions pinned to zero in the estimate; the set
    must be symmetric and stay off the diagonal.  truth optionally carries
    the generating inverse covariance for scoring.
    """

    sigma_hat: np.ndarray
    omega: frozenset = frozenset()
    truth: Optional[np.ndarray] = None
    meta: Optional[dict] = None

    def __post_init__(self):
        self.sigma_hat = np.asarray(self.sigma_hat, dtype=float)
        p = self.sigma_hat.shape[0]
        if self.sigma_hat.ndim != 2 or self.sigma_hat.shape != (p, p):
            raise InvalidInputError("CovselInstance: sigma_hat must be square")
        try:
            linalg.cholesky_factor(self.sigma_hat)
        except NotPositiveDefiniteError as exc:
            raise InvalidInputError("CovselInstance: sigma_hat must be positive definite") from exc
        pairs = frozenset((int(i), int(j)) for i, j in self.omega)
        for i, j in pairs:
            if i == j:
                raise InvalidInputError("CovselInstance: omega must stay off the diagonal")
            if not (0 <= i < p and 0 <= j < p):
                raise InvalidInputError(f"CovselInstance: omega pair ({i}, {j}) out of range")
            if (j, i) not in pairs:
                raise InvalidInputError(f"CovselInstance: omega must contain ({j}, {i}) too")
        self.omega = pairs
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=float)
            if self.truth.shape != (p, p):
                raise InvalidInputError("CovselInstance: truth shape mismatch")

    @property
    def dim(self):
        return self.sigma_hat.shape[0]

    @property
    def free_pairs(self):
        """Upper-triangle (i, j) positions not pinned by omega."""
        p = self.dim
        return [(i, j) for i in range(p) for j in range(i + 1, p) if (i, j) not in self.omega]


def log_likelihood(sigma_hat, x):
    """log det X - <Sigma_hat, X>, the Gaussian likelihood up to constants."""
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    x = np.asarray(x, dtype=float)
    try:
        ld = linalg.logdet_spd(x)
    except NotPositiveDefiniteError as exc:
        raise InvalidInputError("log_likelihood: X must be positive definite") from exc
    return ld - float(np.sum(sigma_hat * x))


def normalized_entropy_loss(sigma_ref, x):
    """Divergence (<S, X> - log det(S X) - p) / p; zero exactly at X = S^{-1}."""
    sigma_ref = np.asarray(sigma_ref, dtype=float)
    x = np.asarray(x, dtype=float)
    p = sigma_ref.shape[0]
    try:
        ld = linalg.logdet_spd(sigma_ref) + linalg.logdet_spd(x)
    except NotPositiveDefiniteError as exc:
        raise InvalidInputError(
            "normalized_entropy_loss: both matrices must be positive definite"
        ) from exc
    return (float(np.sum(sigma_ref * x)) - ld - p) / p


def covsel_defaults():
    """Driver configuration used by solve_covsel when none is given."""
    return PdConfig(
        rho0=1.0,
        sigma=math.sqrt(10.0),
        outer_tol=1e-4,
        bcd=BcdConfig(objective_change_tol=1e-4),
    )


def solve_covsel(instance, r, config=None):
    """Maximum-likelihood inverse covariance with at most r free pairs.

    The matrix variable is flattened and split whole.  The x-step is the
    exact proximal map of -log det (shifted by Sigma_hat), so every iterate
    stays positive definite; the y-step copies the diagonal, zeroes the
    pinned pattern and keeps the r largest remaining pairs, a pair and its
    mirror counting once.  Returns the exactly sparse candidate after a
    positive-definiteness check, plus the solver report.
    """
    p = instance.dim
    pairs = instance.free_pairs
    if not 1 <= r <= len(pairs):
        raise InvalidInputError(f"solve_covsel: need 1 <= r <= {len(pairs)}, got {r}")
    config = config or covsel_defaults()
    sig = instance.sigma_hat

    rows = np.array([i for i, _ in pairs], dtype=int)
    cols = np.array([j for _, j in pairs], dtype=int)

    def objective(x):
        xm = x.reshape(p, p)
        factor = linalg.cholesky_factor(xm)
        value = float(np.sum(sig * xm)) - linalg.logdet_spd(xm, factor=factor)
        grad = sig - linalg.inverse_spd(xm, factor=factor)
        return value, grad.ravel()

    def sparsity_count(x, tol):
        return model.l0_count(x.reshape(p, p)[rows, cols], tol)

    start = np.zeros((p, p))
    np.fill_diagonal(start, 1.0 / sig.diagonal())
    # objective at the diagonal start: p + sum(log sigma_ii)
    config = _widen_margin(config, p + float(np.sum(np.log(sig.diagonal()))))

    problem = model.SparsityProblem(
        objective=objective,
        n=p * p,
        sparse_indices=np.arange(p * p),
        mode=model.Cardinality(r),
        feasible_point=start.ravel(),
        sparsity_count=sparsity_count,
    )

    def x_step(x, y, rho):
        return logdet_prox(y.reshape(p, p) - sig / rho, rho).ravel()

    def y_step(x, rho):
        xm = x.reshape(p, p)
        keep = hard_threshold_top_r(xm[rows, cols], r)
        ym = np.zeros((p, p))
        np.fill_diagonal(ym, xm.diagonal())
        ym[rows, cols] = keep
        ym[cols, rows] = keep
        return ym.ravel()

    report = pd_solve_constrained(problem, x_step, config, y_step=y_step)
    xs = report.x_sparse.reshape(p, p)
    try:
        linalg.cholesky_factor(xs)
    except NotPositiveDefiniteError as exc:
        raise NumericError("solve_covsel: sparse candidate lost positive definiteness") from exc
    return xs, report


# ---------------------------------------------------------------------------
# compressed sensing


@dataclass
class CsInstance:
    """Linear measurements b of a signal through the matrix a.

    truth optionally carries the generating sparse signal for scoring.
    """

    a: np.ndarray
    b: np.ndarray
    truth: Optional[np.ndarray] = None

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.a.ndim != 2:
            raise InvalidInputError("CsInstance: a must be a matrix")
        if self.b.shape != (self.a.shape[0],):
            raise InvalidInputError("CsInstance: b length must match the rows of a")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise InvalidInputError("CsInstance: non-finite data")
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=float)
            if self.truth.shape != (self.a.shape[1],):
                raise InvalidInputError("CsInstance: truth length must match the columns of a")

    @property
    def n_measurements(self):
        return self.a.shape[0]

    @property
    def n_features(self):
        return self.a.shape[1]


def cs_noiseless_defaults():
    """Driver configuration used by solve_cs_noiseless when none is given."""
    return PdConfig(
        rho0=0.1,
        sigma=10.0,
        outer_tol=1e-6,
        outer_scaled=True,
        bcd=BcdConfig(iterate_change_tol=1e-5),
    )


def solve_cs_noiseless(instance, config=None, nu=1.0):
    """Fewest-nonzeros heuristic for a x = b via the per-nonzero surcharge.

    The smooth part is identically zero: all descent pressure comes from
    the split penalty.  The x-step projects the copy onto the measurement
    plane exactly, so the returned x satisfies a x = b at every stage;
    the run starts from a basic feasible point with at most n nonzeros.
    """
    a, b = instance.a, instance.b
    n, p = a.shape
    config = config or cs_noiseless_defaults()
    if nu <= 0:
        raise InvalidInputError("solve_cs_noiseless: nu must be positive")
    start = linalg.basic_solution(a, b)
    # the start is feasible, so the level bound is its surcharge alone
    config = _widen_margin(config, nu * model.l0_count(start))
    try:
        projector = AffineProjector(a, b)
    except NotPositiveDefiniteError as exc:
        raise RankError("solve_cs_noiseless: a must have full row rank") from exc

    def objective(x):
        return 0.0, np.zeros(p)

    problem = model.SparsityProblem(
        objective=objective,
        n=p,
        sparse_indices=np.arange(p),
        mode=model.Regularized(float(nu)),
        feasible_point=start,
        projection=projector.project,
    )

    def x_step(x, y, rho):
        return projector.project(y)

    report = pd_solve_regularized(problem, x_step, config, y0=start.copy())
    return report.x, report


def cs_noisy_defaults():
    """Driver configuration used by solve_cs_noisy when none is given."""
    return PdConfig(
        rho0=1.0,
        sigma=math.sqrt(10.0),
        outer_tol=1e-3,
        outer_scaled=True,
        bcd=BcdConfig(objective_change_tol=1e-2),
    )


def solve_cs_noisy(instance, r, config=None, x0=None, y0=None):
    """Budgeted least squares for noisy measurements.

    Each x-step solves the shifted normal equations
    (a'a + rho I) x = a'b + rho y by conjugate gradients, warm-started
    from the incumbent; x0/y0 allow continuing along a budget sweep.
    Returns the exactly sparse candidate and the solver report.
    """
    a, b = instance.a, instance.b
    p = instance.n_features
    if not 1 <= r <= p:
        raise InvalidInputError(f"solve_cs_noisy: need 1 <= r <= {p}, got {r}")
    # residual objective at the zero start
    config = _widen_margin(config or cs_noisy_defaults(), 0.5 * float(b @ b))
    atb = a.T @ b

    def objective(x):
        resid = a @ x - b
        return 0.5 * float(resid @ resid), a.T @ resid

    problem = model.SparsityProblem(
        objective=objective,
        n=p,
        sparse_indices=np.arange(p),
        mode=model.Cardinality(r),
        feasible_point=np.zeros(p),
    )

    def x_step(x, y, rho):
        return cg_solve(lambda v: a.T @ (a @ v) + rho * v, atb + rho * y, x0=x).x

    report = pd_solve_constrained(problem, x_step, config, y0=y0, x0=x0)
    return report.x_sparse, report


def iht_baseline(instance, r, step=None, max_iters=2000, tol=1e-8, x0=None):
    """Gradient descent on the squared residual with a hard budget.

    When no step is given, a safe default 0.9 / ||a'a||_2 is estimated by
    50 power iterations from a fixed start.  The squared residual must not
    increase between iterations; a rise beyond rounding slack aborts the
    run.  Stops once the iterate stalls to tol in relative sup norm.
    """
    a, b = instance.a, instance.b
    p = instance.n_features
    if not 1 <= r <= p:
        raise InvalidInputError(f"iht_baseline: need 1 <= r <= {p}, got {r}")
    if step is None:
        v = np.ones(p) / math.sqrt(p)
        lam = 0.0
        for _ in range(50):
            w = a.T @ (a @ v)
            lam = float(v @ w)
            norm = float(np.linalg.norm(w))
            if norm == 0.0:  # a'a annihilates v; any step is safe
                break
            v = w / norm
        step = 0.9 / lam if lam > 0.0 else 1.0
    elif step <= 0 or not np.isfinite(step):
        raise InvalidInputError("iht_baseline: step must be positive")

    x = np.zeros(p) if x0 is None else np.asarray(x0, dtype=float).copy()
    resid = a @ x - b
    obj = 0.5 * float(resid @ resid)
    for _ in range(max_iters):
        x_new = hard_threshold_top_r(x - step * (a.T @ resid), r)
        resid = a @ x_new - b
        obj_new = 0.5 * float(resid @ resid)
        if obj_new > obj + 1e-10 * (1.0 + abs(obj)):
            raise MonotonicityError("iht_baseline: residual increased, step too long")
        delta = float(np.linalg.norm(x_new - x, np.inf))
        x, obj = x_new, obj_new
        if delta <= tol * max(float(np.linalg.norm(x, np.inf)), 1.0):
            break
    return x


# ---------------------------------------------------------------------------
# where the l_p surrogate prefers the denser point


@dataclass
class CounterexampleReport:
    """Two exact solutions of one underdetermined system and their penalties.

    Both candidate points satisfy a x = b by construction, so each
    penalized value reduces to nu times the l_p norm of the point.
    """

    a: np.ndarray
    b: np.ndarray
    exponent: float
    nu: float
    x_two_spike: np.ndarray
    x_spread: np.ndarray
    value_two_spike: float
    value_spread: float
    ratio_gap: float
    residual_two_spike: float
    residual_spread: float


def lp_counterexample(p_exponent, nu, b1, b2):
    """Construct a system where the l_p surrogate rejects the sparsest point.

    b = b1 + b2 can be written with two spikes (coefficient 1 on the b1
    and b2 columns) or spread over two scaled identity blocks.  The spread
    point has l_p norm exactly 1 while the two-spike point scores 2^(1/p),
    so for any exponent in (0, 1] the surrogate strictly prefers the
    denser representation; the relative gap 2^(1/p) - 1 is at least 1.
    """
    if not 0.0 < p_exponent <= 1.0:
        raise InvalidInputError(
            f"lp_counterexample: exponent must lie in (0, 1], got {p_exponent}"
        )
    if nu <= 0:
        raise InvalidInputError("lp_counterexample: nu must be positive")
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1.ndim != 1 or b1.shape != b2.shape:
        raise InvalidInputError("lp_counterexample: b1 and b2 must be equal-length vectors")
    stack = np.concatenate([b1, b2])
    if not np.all(np.isfinite(stack)):
        raise InvalidInputError("lp_counterexample: non-finite inputs")
    if np.all(stack == 0.0):
        raise InvalidInputError("lp_counterexample: b1 and b2 must not both vanish")

    n = b1.size
    alpha = float(np.sum(np.abs(stack) ** p_exponent) ** (1.0 / p_exponent))
    a = np.hstack([b1[:, None], b2[:, None], alpha * np.eye(n), alpha * np.eye(n)])
    b = b1 + b2

    x_spike = np.zeros(2 + 2 * n)
    x_spike[:2] = 1.0
    x_spread = np.concatenate([[0.0, 0.0], b1 / alpha, b2 / alpha])

    value_spike = nu * 2.0 ** (1.0 / p_exponent)
    value_spread = float(nu)
    return CounterexampleReport(
        a=a,
        b=b,
        exponent=float(p_exponent),
        nu=float(nu),
        x_two_spike=x_spike,
        x_spread=x_spread,
        value_two_spike=value_spike,
        value_spread=value_spread,
        ratio_gap=value_spike / value_spread - 1.0,
        residual_two_spike=float(np.linalg.norm(a @ x_spike - b)),
        residual_spread=float(np.linalg.norm(a @ x_spread - b)),
    )
