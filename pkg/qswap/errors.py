"""Exception types shared by the services and mapped to CLI exit codes."""


class QswapError(Exception):
    exit_code: int = 1


class ConfigError(QswapError, ValueError):
    """Bad reference, index, range or scenario description."""
    exit_code = 2


class MeasurementError(QswapError, ValueError):
    """Light was detected twice, or detected light was reused."""
    exit_code = 2


class PhysicalityError(QswapError):
    """Covariance violates the uncertainty relation or cannot be factorized."""
    exit_code = 3


class LinearizationError(PhysicalityError):
    """Direct detection of a mode too dark for the bright-beam linearization."""


class DegenerateInputError(PhysicalityError):
    """An operation whose answer is undefined for a dark input."""
