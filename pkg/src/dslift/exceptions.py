"""
Custom exceptions for the dslift package.

Every error carries the process exit code the command-line runner reports
for it: validation problems exit with 2, numerical failures with 3.
"""

__all__ = [
    "DsliftError",
    "ValidationError",
    "ParameterDomainError",
    "IncompatibleParametersError",
    "IncompatibleSpacesError",
    "UnsupportedOperationError",
    "NumericalError",
    "NumericalFailureError",
    "InsufficientSpectrumError",
    "NonConvergenceError",
]


class DsliftError(Exception):
    """Base exception for all dslift errors."""

    exit_code: int = 1


class ValidationError(DsliftError):
    """Raised when an input violates the pre-conditions of an operation."""

    exit_code = 2


class ParameterDomainError(ValidationError):
    """
    Raised when a numeric parameter lies outside its admissible range.

    Attributes:
        parameter: Name of the offending parameter, if known.
        value: The rejected value, if known.
    """

    def __init__(self, message: str, parameter: str | None = None, value: object = None):
        self.parameter = parameter
        self.value = value
        super().__init__(message)


class IncompatibleParametersError(ValidationError):
    """
    Raised when two Jacobi parameter pairs cannot be joined.

    The connection coefficients are banded only when the parameter offsets
    a = |alpha1 - alpha2| / 2 and b = |beta1 - beta2| / 2 are integers.

    Attributes:
        first: Parameters of the target system.
        second: Parameters of the base system.
    """

    def __init__(self, message: str, first: object = None, second: object = None):
        self.first = first
        self.second = second
        super().__init__(message)


class IncompatibleSpacesError(ValidationError):
    """Raised when two data spaces do not share a coordinate domain, metric and measure."""
    pass


class UnsupportedOperationError(ValidationError):
    """Raised when an operation needs per-index eigenfunctions on a kernel-level space."""
    pass


class NumericalError(DsliftError):
    """Base class for failures of the numerical machinery itself."""

    exit_code = 3


class NumericalFailureError(NumericalError):
    """
    Raised when a numerical routine cannot deliver a trustworthy result.

    Attributes:
        diagnostic: Free-form details (iteration counts, residuals).
    """

    def __init__(self, message: str, diagnostic: dict | None = None):
        self.diagnostic = diagnostic or {}
        if self.diagnostic:
            details = ", ".join(f"{k}={v}" for k, v in self.diagnostic.items())
            message += f" ({details})"
        super().__init__(message)


class InsufficientSpectrumError(NumericalError):
    """
    Raised when a kernel would be silently truncated by the available spectrum.

    Attributes:
        requested: The degree parameter that was asked for.
        available: The largest degree parameter the space can serve exactly.
    """

    def __init__(self, requested: float, available: float, what: str = "space"):
        self.requested = requested
        self.available = available
        message = (
            f"Degree {requested:g} exceeds the spectrum of this {what}: "
            f"at most {available:g} is available. "
            "Rebuild with a larger max_index / max_degree."
        )
        super().__init__(message)


class NonConvergenceError(NumericalError):
    """
    Raised when a dyadic schedule does not settle within its level budget.

    Attributes:
        differences: Sup-norm differences between consecutive levels.
    """

    def __init__(self, message: str, differences: list[float] | None = None):
        self.differences = list(differences or [])
        if self.differences:
            tail = ", ".join(f"{d:.3e}" for d in self.differences[-4:])
            message += f". Last differences: {tail}"
        super().__init__(message)
