"""Exception types shared across the package."""


class QresnetError(Exception):
    """Base class for all package errors."""


class CapacityError(QresnetError):
    """Register size or enumeration size exceeds the supported cap."""


class ValidationError(QresnetError):
    """Inputs violate an operation contract (arity, shape, domain, hermiticity)."""


class ConditioningError(QresnetError):
    """A linear system is too ill-conditioned to solve reliably."""


class DataFormatError(QresnetError):
    """A data file is malformed (bad magic, truncated, inconsistent header)."""


class DegenerateFeatureError(QresnetError):
    """A feature column has zero range and cannot be rescaled."""


class ShiftIneligibleError(QresnetError):
    """Parameter-shift rule does not apply to this parameter; use finite differences."""
