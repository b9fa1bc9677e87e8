"""Exception hierarchy shared by every module.

The CLI maps the three top-level families onto exit codes:
``ConfigError`` -> 2, ``DataError`` -> 3, ``NumericalError`` -> 4.
"""


class QsvmError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(QsvmError, ValueError):
    """Invalid or inconsistent experiment configuration."""


class DataError(QsvmError, ValueError):
    """Input data is malformed, missing, or inconsistent."""


class DimensionError(DataError):
    """Shapes of arrays do not agree."""


class SymmetryError(DataError):
    """A matrix required to be symmetric is not."""


class DegenerateInputError(DataError):
    """Input is valid in shape but degenerate (zero variance, zero trace, ...)."""


class NumericalError(QsvmError, ArithmeticError):
    """A numerical routine failed to converge or reach its target."""


class UnreachableTargetError(NumericalError):
    """A search target lies outside the reachable bracket."""
