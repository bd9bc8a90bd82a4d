"""Exception types shared across the package.

Everything raised on purpose derives from :class:`SmvphaseError`, so callers
(notably the CLI) can map library failures to a dedicated exit code.
"""


class SmvphaseError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(SmvphaseError, ValueError):
    """Input image has the wrong shape (non-square, non-power-of-two, mismatch)."""


class ConjugateSymmetryError(SmvphaseError, ValueError):
    """A spectrum expected to be conjugate-symmetric produced a complex image."""


class BandConditionError(SmvphaseError, ValueError):
    """A message signal has too much energy near or above the carrier band."""


class UndefinedValueError(SmvphaseError, ValueError):
    """A quantity (argument of zero, correlation of a constant) is undefined."""


class AmbiguousPeakError(SmvphaseError, ValueError):
    """Spectral peak search found two unrelated candidates of equal strength."""
