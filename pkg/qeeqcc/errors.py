"""Module containing the exception classes raised by qeeqcc."""


from typing import Any, Optional


class QeeqccError(Exception):
    """Base class for all qeeqcc errors."""


class ParseError(QeeqccError, ValueError):
    """Raised when an FCIDUMP file or tensor document cannot be read."""

    def __init__(self, message: str, /, line: Optional[int] = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        """Line number (1-based) the error refers to, if known."""


class ConfigError(QeeqccError, ValueError):
    """Raised when an experiment configuration is rejected."""


class ResourceLimitError(QeeqccError, RuntimeError):
    """Raised when a problem is too large for a dense backend."""


class EmptyResultError(QeeqccError, ValueError):
    """Raised when post-selection discards every measurement."""


class NumericalError(QeeqccError, ArithmeticError):
    """Raised when a numerical procedure fails."""


class MitigationError(NumericalError):
    """Raised when a readout confusion matrix cannot be inverted."""


class DegenerateSubspaceError(NumericalError):
    """Raised when no overlap eigenvalue survives the QSE threshold."""


class OptimizerDivergedError(NumericalError):
    """Raised when the VQE objective returns a non-finite energy."""

    def __init__(self, message: str, /, trace: Any = None) -> None:
        super().__init__(message)
        self.trace = trace
        """The partial `VqeTrace` recorded before the divergence."""
