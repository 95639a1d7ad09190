"""Exception types raised across the package."""


class ProjInvError(Exception):
    """Base class for all library errors."""


class NotInGeneralPosition(ProjInvError):
    pass


class DenominatorNearZero(ProjInvError):
    pass


class FrameDenominatorNearZero(DenominatorNearZero):
    pass


class SingularMatrix(ProjInvError):
    pass


class SamplingExhausted(ProjInvError):
    pass


class EvaluationFailure(ProjInvError):
    pass


class ZeroValue(EvaluationFailure):
    pass


class OutOfBounds(ProjInvError):
    pass


class CanonicalizationError(ProjInvError):
    """Matrix has c3 = 0 and cannot be scaled to the c3 = 1 representative."""


class ImageFormatError(ProjInvError):
    """Input is not a readable binary PGM."""
