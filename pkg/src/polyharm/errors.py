"""Exception hierarchy shared by the library and the command-line driver."""


class PolyharmError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(PolyharmError, ValueError):
    """Invalid or incomplete run configuration."""

    exit_code = 2


class DomainError(PolyharmError, ValueError):
    """Argument outside the mathematical domain (r > R, n < 2, ...)."""

    exit_code = 3


class UnsupportedDimensionError(DomainError):
    """Basis or quadrature requested for a dimension other than 2 or 3."""


class DegenerateKnotsError(PolyharmError, ValueError):
    """Coincident interpolation knots, or a zero radius where division by r^k is needed."""

    exit_code = 4


class InsufficientSamplesError(PolyharmError, ValueError):
    """Too few radial samples for the requested Chebyshev fit."""

    exit_code = 5


class IllConditionedDerivativeError(PolyharmError, ValueError):
    """Derivative order too high for the Chebyshev representation."""

    exit_code = 5


class IncompleteInputError(PolyharmError, ValueError):
    """A mode in range has no data."""

    exit_code = 5


class InconsistentInputError(PolyharmError, ValueError):
    """Inputs disagree on dimension, truncation degree or radius."""

    exit_code = 5


class ZeroTraceError(PolyharmError, ValueError):
    """Every coefficient of a sphere trace lies below the floor."""

    exit_code = 6


class MagnitudeError(PolyharmError, OverflowError):
    """Interpolation data overflowed (typically phi / r**k for large k)."""

    exit_code = 7


class BoundaryCaseError(PolyharmError, ValueError):
    """C * R == 1, the unresolved boundary of the divergence dichotomy."""

    exit_code = 8
