"""Exception types raised across the package."""


class DiagcircError(Exception):
    """Base class for all package errors."""


class CapacityError(DiagcircError):
    """A requested size exceeds the dense/exhaustive budget of a module."""

    def __init__(self, message, module=None):
        if module:
            message = f"[{module}] {message}"
        super().__init__(message)
        self.module = module


class ShapeError(DiagcircError, ValueError):
    """Operands have incompatible dimensions."""


class ArgumentError(DiagcircError, ValueError):
    """An argument is outside its documented domain."""


class UnsupportedFormError(DiagcircError, TypeError):
    """A circuit contains gates the requested evaluator cannot handle."""


class ConfigurationError(DiagcircError):
    """A component was configured with an ensemble that cannot meet its contract."""


class EmptyShellError(DiagcircError):
    """An energy window contains no eigenstates."""


class CalibrationError(DiagcircError):
    """An inverse temperature cannot be found for the requested energy."""


class NonConvergentError(DiagcircError):
    """A design distance never drops below the requested tolerance."""
