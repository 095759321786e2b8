"""Exception types shared across the package.

The CLI maps these onto exit codes: ``ConfigError`` -> 2,
``CapacityError`` -> 3, ``NumericalError`` -> 4.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class CapacityError(ValueError):
    """Requested register exceeds what the dense simulator can hold."""


class NumericalError(RuntimeError):
    """An iterative routine failed to converge or produced no usable data."""
