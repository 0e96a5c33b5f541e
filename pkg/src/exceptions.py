"""
Error taxonomy for the verification kernel.

Value-type errors also subclass ValueError so callers that only catch
ValueError (the convention of the loaders) keep working.
"""

from typing import Optional


class VerificationError(Exception):
    """Base class for every error raised by this package."""


class DegenerateConfiguration(VerificationError, ValueError):
    """Two points coincide, or sit closer than the backend can resolve."""


class SamePoint(VerificationError, ValueError):
    """A chord was requested between a point and itself."""


class ParityError(VerificationError, ValueError):
    """The point count has the wrong parity for the requested operation."""


class OddCount(ParityError):
    """An even-count identity was evaluated on an odd number of points."""


class DuplicateNode(VerificationError, ValueError):
    """Interpolation or power-sum nodes are not pairwise distinct."""


class UsageError(VerificationError, ValueError):
    """Invalid combination of command-line or API options."""


class InstanceParseError(VerificationError, ValueError):
    """
    An instance or nodes file could not be parsed.

    Attributes:
        location: JSON path of the offending field, e.g. "half_angles[2]"
    """

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class EvaluationFailed(VerificationError):
    """
    A residual evaluator raised during precision escalation.

    The original exception is chained as ``__cause__``.
    """

    def __init__(self, precision: int, cause: BaseException):
        self.precision = precision
        super().__init__(f"evaluation failed at {precision} bits: {cause}")
