"""Exception types shared across the package.

The CLI maps these onto process exit codes: invalid input -> 2,
numeric/convergence failures -> 3, I/O problems -> 4.
"""


class PdsparseError(Exception):
    """Base class for all package-specific failures."""


class InvalidInputError(PdsparseError, ValueError):
    """Malformed argument: bad shape, non-finite data, out-of-range option."""


class NumericError(PdsparseError, ArithmeticError):
    """Non-finite value or numerically meaningless state encountered."""


class ConvergenceError(PdsparseError, RuntimeError):
    """An iterative kernel exhausted its iteration budget."""


class NotPositiveDefiniteError(NumericError):
    """A matrix required to be SPD failed a positivity check."""


class RankError(NumericError):
    """Rank deficiency where full rank is required."""


class MonotonicityError(PdsparseError, RuntimeError):
    """Block-descent objective increased beyond slack: broken subsolver."""


class DataFormatError(PdsparseError, RuntimeError):
    """A data file exists but its contents do not parse; treated as I/O."""
