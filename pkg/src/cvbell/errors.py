"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical failures (truncation, dimension caps, consistency checks) with 3
and under-populated sampling cells with 4.
"""


class CVBellError(Exception):
    """Base class for all package errors."""


class ConfigError(CVBellError, ValueError):
    """Invalid configuration file or parameter combination."""


class NumericalError(CVBellError):
    """A numerical guarantee could not be met."""


class CutoffError(NumericalError, ValueError):
    """The Fock cutoff is too small for the requested tail tolerance."""


class DimensionError(NumericalError, ValueError):
    """The truncated Hilbert space exceeds the configured dimension cap."""


class ConsistencyError(NumericalError):
    """Two routes to the same quantity disagree beyond tolerance."""


class GridOverflowError(NumericalError):
    """A quadrature distribution has too much mass outside its grid."""


class InsufficientSamplesError(CVBellError):
    """A required measurement-setting cell has too few trials."""
