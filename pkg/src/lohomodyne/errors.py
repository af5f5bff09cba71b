"""Exception hierarchy.

Every error is a ``ValueError`` subclass so callers that only care about
"bad input" can catch that, while the CLI maps the hierarchy to exit codes.
"""


class LohomodyneError(ValueError):
    """Base class for all package errors."""


class ValidationError(LohomodyneError):
    """Input violates a documented precondition."""


class NumericError(LohomodyneError):
    """A numerical procedure could not meet its tolerance."""


class NormalizationError(ValidationError):
    pass


class NegativeWeight(ValidationError):
    pass


class NegativeInput(ValidationError):
    pass


class RangeError(ValidationError):
    pass


class NonPositiveResolution(ValidationError):
    pass


class MissingMoment(ValidationError):
    pass


class OddDegree(ValidationError):
    pass


class DegreeTooSmall(ValidationError):
    pass


class SmallMomentBound(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class ZeroDelta(ValidationError):
    pass


class NoBudget(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonPositiveSigma(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


class ConfigError(ValidationError):
    """Malformed run configuration."""


class CutoffTooSmall(NumericError):
    pass


class CutoffLeakage(NumericError):
    pass
