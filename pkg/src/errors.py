"""
Errors Module

Exception hierarchy shared by every sub-package. Each class carries the process
exit code the experiment CLI maps it to.
"""

from src.constants import EXIT_CONFIG_ERROR, EXIT_DATA_ERROR, EXIT_NUMERICAL_ERROR


class FedSketchError(Exception):
    """Base class for all errors raised by the library."""

    exit_code = 1


class ConfigError(FedSketchError, ValueError):
    """Experiment configuration failed validation."""

    exit_code = EXIT_CONFIG_ERROR


class SketchError(FedSketchError, ValueError):
    """Invalid sketch construction or application."""

    exit_code = EXIT_CONFIG_ERROR


class DataError(FedSketchError):
    """Dataset could not be read or is inconsistent."""

    exit_code = EXIT_DATA_ERROR


class LibsvmFormatError(DataError):
    """
    Malformed LIBSVM input.

    Attributes:
        line_number: 1-based line number of the offending line (None for
                     whole-file errors such as an empty stream)
    """

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class LabelDomainError(DataError, ValueError):
    """Labels outside the domain required by the loss family."""


class PartitionError(DataError, ValueError):
    """Partition plan cannot be realized on the dataset."""


class NumericalError(FedSketchError, ArithmeticError):
    """Numerical failure during optimization."""

    exit_code = EXIT_NUMERICAL_ERROR


class HessianSolveError(NumericalError):
    """Hessian factorization failed even after jitter escalation."""


class LineSearchError(NumericalError):
    """
    Backtracking exhausted its budget without satisfying the Armijo predicate.

    Attributes:
        worker_id: Worker whose search failed (None outside a federation)
        backtracks: Number of backtracks performed
    """

    def __init__(self, message: str, worker_id: int | None = None, backtracks: int = 0):
        self.worker_id = worker_id
        self.backtracks = backtracks
        super().__init__(message)


class ReferenceOptimumError(NumericalError):
    """Reference optimum did not converge to the requested tolerance."""
