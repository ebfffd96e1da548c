"""Exception types raised by the analyzer and simulator."""


class CTMNError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CTMNError, ValueError):
    """Invalid network description, node parameters or simulation settings."""


class StateExplosionError(CTMNError):
    """The feasible state space exceeds the configured cap."""


class ParameterRangeError(CTMNError):
    """Parameters push the product-form weights outside floating point range."""


class NumericalError(CTMNError):
    """A linear solve failed or did not meet its accuracy tolerance."""
