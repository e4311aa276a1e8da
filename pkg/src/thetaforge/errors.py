"""Exception types shared across the package."""


class ThetaForgeError(Exception):
    """Base class for all package-specific errors."""


class ParityError(ThetaForgeError):
    """Path length k must be odd."""


class RangeError(ThetaForgeError):
    """A derived ratio or parameter falls outside its admissible range."""


class RigorError(ThetaForgeError):
    """Rigorous-mode hypotheses are not met by the supplied parameters."""


class TooSmallError(ThetaForgeError):
    """The requested size admits no prime window."""


class CapacityError(ThetaForgeError):
    """The operation would exceed a configured size cap."""


class DimensionError(ThetaForgeError):
    """A point or coefficient vector has the wrong length."""
