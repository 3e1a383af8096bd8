"""Exception hierarchy shared by the analytic, simulation and CLI layers."""


class GinprodError(Exception):
    """Base class for all errors raised by ginprod."""

    exit_code = 1


class DomainError(GinprodError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""

    exit_code = 2


class UnsupportedRangeError(GinprodError, ValueError):
    """Parameters exceed the range where double precision is trusted."""

    exit_code = 4


class QuadratureError(GinprodError, ArithmeticError):
    """Panel refinement failed to meet the requested tolerance.

    Attributes
    ----------
    estimate : float
        Best estimate obtained before giving up.
    error_bound : float
        Absolute difference between the last two refinement levels.
    """

    exit_code = 3

    def __init__(self, message, estimate=float("nan"), error_bound=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class NumericalConsistencyError(GinprodError, ArithmeticError):
    """A computed quantity violates a structural property (sign, symmetry)."""

    exit_code = 3


class SolverError(GinprodError, RuntimeError):
    """The eigenvalue solver failed to converge on a sampled matrix."""

    exit_code = 3
