"""Exception types shared across the package."""

from __future__ import annotations


class ReconError(Exception):
    """Base class for all errors raised by this package."""


class InvalidNetworkError(ReconError):
    """The network violates a structural precondition (size, diagonal, shapes)."""


class UndefinedReciprocityError(ReconError):
    """Reciprocity requested on a network with no links."""


class ParseError(ReconError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataValidationError(ReconError):
    """Input parsed but failed a semantic check (signs, self-loops, arity)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigurationError(ReconError):
    """Invalid run configuration (bad distribution spec, missing file, bad range)."""


class DomainError(ReconError):
    """Argument outside the mathematical domain of an operation."""


class NonConvergenceError(ReconError):
    """Solver did not reach the requested tolerance. Carries the SolverReport."""

    def __init__(self, message: str, report=None):
        self.report = report
        if report is not None:
            message = f"{message} ({report})"
        super().__init__(message)


class NumericalError(ReconError):
    """Non-finite values or a failed numerical routine."""


class DegenerateEnsembleError(ReconError):
    """An ensemble statistic is undefined (zero spread, all dyads masked)."""


class InsufficientDataError(ReconError):
    """Too few data points for the requested estimate."""


class UndefinedAUCError(ReconError):
    """ROC/AUC requested with single-class observations."""


class SingularityError(ReconError):
    """Evaluation at a pole of the formula (e.g. model reciprocity of 1)."""
