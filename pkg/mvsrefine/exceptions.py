"""Data errors raised by the reconstruction pipeline.

Every error a caller can trigger with bad input data derives from
ReconstructionError; the CLI maps that family to exit code 2.
"""


class ReconstructionError(Exception):
    """Base class for all data errors."""


class BehindCamera(ReconstructionError):
    """A point lies on or behind the image plane of a camera."""


class NonPositiveDepth(ReconstructionError):
    pass


class DimensionMismatch(ReconstructionError):
    pass


class ImageTooSmall(ReconstructionError):
    pass


class NoSources(ReconstructionError):
    """An operation that needs source views received none."""


class NonPositiveTau(ReconstructionError):
    pass


class NonPositiveBeta(ReconstructionError):
    pass


class DivergedLoss(ReconstructionError):
    """The refinement objective became non-finite."""


class TooFewViews(ReconstructionError):
    pass


class EmptyCloud(ReconstructionError):
    pass


class NoValidPixels(ReconstructionError):
    pass


class FormatError(ReconstructionError):
    """A file on disk does not follow its format."""


class MalformedHeader(FormatError):
    pass


class UnexpectedEof(FormatError):
    pass


class MalformedCamFile(FormatError):
    pass


class InvalidSpec(FormatError):
    """A scene description is unreadable or violates a scene invariant."""
