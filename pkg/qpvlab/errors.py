"""Exception types raised by qpvlab.

Everything derives from ``QpvError``, itself a ``ValueError``, so callers that
catch ``ValueError`` keep working.
"""

from typing import Optional


class QpvError(ValueError):
    """Base class for all library errors."""


class ShapeMismatchError(QpvError):
    """Array dimensions disagree with the declared register shape."""


class DimensionCapError(QpvError):
    """A register or operand exceeds the configured dimension cap."""


class NotHermitianError(QpvError):
    """An operator expected to be Hermitian is asymmetric beyond tolerance."""


class NotIsometryError(QpvError):
    """A matrix expected to satisfy U*U = I does not."""


class InvalidProjectorError(QpvError):
    """A qubit projector could not be constructed or parsed."""


class MissingBasisError(QpvError):
    """A strategy has no isometry U_P for some basis P in the basis set."""


class MissingDecodersError(QpvError):
    """Acceptance was requested without decoders to evaluate it with."""


class MixedChannelError(QpvError):
    """Hidden-measurement pairs coming from different channels were combined."""


class ConfigError(QpvError):
    """Environment configuration is invalid."""


class InputFormatError(QpvError):
    """An input file is malformed; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str, cause: Optional[Exception] = None):
        self.key = key
        self.cause = cause
        super().__init__(f"{key}: {message}")
