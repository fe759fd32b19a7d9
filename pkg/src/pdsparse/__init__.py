"""Penalty decomposition methods for l0-constrained and l0-regularized problems."""

__version__ = "0.1.0"

from ._kernels import backend_name
from .applications import (
    CounterexampleReport,
    CovselInstance,
    CsInstance,
    LogisticDataset,
    LogisticModel,
    iht_baseline,
    lp_counterexample,
    solve_covsel,
    solve_cs_noiseless,
    solve_cs_noisy,
    solve_sparse_logistic,
)
from .driver import PdConfig, SolveReport, pd_solve_constrained, pd_solve_regularized
from .errors import (
    ConvergenceError,
    DataFormatError,
    InvalidInputError,
    MonotonicityError,
    NotPositiveDefiniteError,
    NumericError,
    PdsparseError,
    RankError,
)
from .generators import gen_covsel_instance, gen_cs_instance, gen_logistic_instance
from .model import Cardinality, Regularized, SparsityProblem, l0_count
from .runners import (
    ExperimentConfig,
    RunResult,
    run_counterexample,
    run_covsel_table,
    run_cs_noisy,
    run_cs_recovery_table,
    run_logistic,
    run_tradeoff_curve,
)

__all__ = [
    "backend_name",
    "Cardinality",
    "ConvergenceError",
    "CounterexampleReport",
    "CovselInstance",
    "CsInstance",
    "DataFormatError",
    "ExperimentConfig",
    "InvalidInputError",
    "LogisticDataset",
    "LogisticModel",
    "MonotonicityError",
    "NotPositiveDefiniteError",
    "NumericError",
    "PdConfig",
    "PdsparseError",
    "RankError",
    "Regularized",
    "RunResult",
    "SolveReport",
    "SparsityProblem",
    "gen_covsel_instance",
    "gen_cs_instance",
    "gen_logistic_instance",
    "iht_baseline",
    "l0_count",
    "lp_counterexample",
    "pd_solve_constrained",
    "pd_solve_regularized",
    "run_counterexample",
    "run_covsel_table",
    "run_cs_noisy",
    "run_cs_recovery_table",
    "run_logistic",
    "run_tradeoff_curve",
    "solve_covsel",
    "solve_cs_noiseless",
    "solve_cs_noisy",
    "solve_sparse_logistic",
    "__version__",
]
