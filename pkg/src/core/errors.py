"""Exception hierarchy for the laboratory.

Every error raised on purpose by library code derives from ``GbmError`` so the
CLI can map it to a documented exit code.
"""


class GbmError(Exception):
    """Base class for all laboratory errors."""

    exit_code: int = 6


class DimensionMismatchError(GbmError, ValueError):
    """Raised when a point, direction or body has the wrong dimension."""

    exit_code = 5


class DegenerateBodyError(GbmError, ValueError):
    """Raised for zero widths, open-interval violations or zero support."""

    exit_code = 6


class SamplingError(GbmError):
    """Raised when a Monte Carlo estimate cannot be trusted or was not budgeted."""

    exit_code = 6


class ConvergenceError(GbmError):
    """Raised when an iterative solver or an ODE integration fails."""

    exit_code = 6


class SchemaError(GbmError, ValueError):
    """Raised when a JSON document does not match its schema."""

    exit_code = 4


class ConfigurationError(GbmError):
    """Raised for invalid run configuration (for example a missing seed)."""

    exit_code = 7


def require(condition: bool, message: str, error: type = GbmError) -> None:
    """Raise ``error(message)`` unless ``condition`` holds."""
    if not condition:
        raise error(message)
