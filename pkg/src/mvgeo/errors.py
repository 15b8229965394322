"""Exception types shared across the toolkit."""


class MvGeoError(Exception):
    """Base class for all toolkit errors."""


class NonPositiveDepth(MvGeoError):
    """Point is behind or on the camera plane (Z <= eps)."""


class CheiralityViolation(MvGeoError):
    """Transformed point fails the in-front-of-camera test."""


class DimensionMismatch(MvGeoError):
    """Array shapes of the inputs are inconsistent."""


class InvalidRange(MvGeoError):
    """Depth hypothesis range is empty or inverted."""


class EmptyInput(MvGeoError):
    """An operation received an empty sequence."""


class NotPositiveDefinite(MvGeoError):
    """Cholesky factorization failed."""


class InsufficientConstraints(MvGeoError):
    """Too few valid residuals to constrain a pose block."""


class NoValidPixels(MvGeoError):
    """No jointly valid pixels for a loss or metric."""


class NoAssociations(MvGeoError):
    """Fewer than two matched trajectory pairs."""


class InsufficientFrames(MvGeoError):
    """Not enough frames for the requested operation."""


class InvalidParams(MvGeoError):
    """Scene or config parameters are out of range."""


class FormatError(MvGeoError):
    """A file did not match its expected format."""


class NonUnitQuaternion(MvGeoError):
    """Trajectory quaternion too far from unit norm."""
