"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when user-supplied parameters or config files are invalid."""


class InternalError(RuntimeError):
    """Raised when a structurally guaranteed property fails at runtime.

    These indicate a bug or numerical breakdown, not a user error: e.g. an
    infeasible Mather LP on a strongly connected graph, or an empty Aubry set.
    """


class RangeExhaustedError(RuntimeError):
    """Numeric Legendre transform attained its maximum on the momentum box boundary."""
