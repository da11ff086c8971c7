"""Exception types shared across the package."""


class ADSPQEError(Exception):
    """Base class for package errors."""


class FCIDumpError(ADSPQEError, ValueError):
    """Malformed FCIDUMP input."""


class ConfigurationError(ADSPQEError, ValueError):
    """Inconsistent electron count, spin or run configuration."""


class ConsistencyError(ADSPQEError, ValueError):
    """Inputs that contradict each other (duplicate records, foreign operators)."""


class NumericalIntegrityError(ADSPQEError, ArithmeticError):
    """A quantity that must be real/finite was not."""


class ConvergenceError(ADSPQEError, RuntimeError):
    """An iterative solver failed to converge."""
