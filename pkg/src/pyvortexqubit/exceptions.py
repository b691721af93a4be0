"""
Exception hierarchy for `pyvortexqubit`.

Every error raised on purpose by the package derives from
`VortexQubitError`, so callers (the CLI in particular) can tell modelled
failures apart from programming errors.
"""

# Built-Ins
from typing import Optional


class VortexQubitError(Exception):
    """Base class for all package errors."""


class ConfigurationError(VortexQubitError, ValueError):
    """
    Raised when a configuration or parameter combination is invalid.

    Attributes
    ----------
    field: str or None
        Dotted path of the offending configuration field, if known.
    """

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class AccuracyError(VortexQubitError):
    """
    Raised when a numerical tolerance cannot be met.

    Attributes
    ----------
    estimate: float
        Best value obtained before giving up.
    error_bound: float
        Error bound reported for `estimate`.
    """

    def __init__(
        self, message: str, estimate: float, error_bound: float
    ) -> None:
        self.estimate = estimate
        self.error_bound = error_bound
        super().__init__(
            f"{message} (estimate={estimate:.6e}, "
            f"error_bound={error_bound:.3e})"
        )


class StiffnessError(VortexQubitError):
    """Raised when the ODE integrator cannot advance the solution."""


class NoCondensateError(VortexQubitError, ValueError):
    """Raised when the chemical potential lies below the trap minimum."""


class StateError(VortexQubitError):
    """Raised when an operation needs state that was never prepared."""


class AnalysisError(VortexQubitError):
    """Raised when a density grid cannot support the requested analysis."""
