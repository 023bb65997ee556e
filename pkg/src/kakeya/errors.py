"""Exception hierarchy shared by the package."""


class KakeyaError(Exception):
    """Base class for all package errors."""


class InvalidInputError(KakeyaError, ValueError):
    """Malformed parameters or documents."""


class HalfTurnError(KakeyaError):
    """A point reflection (u = -1) has no canonical short elementary path."""


class TimeOutOfRangeError(KakeyaError, ValueError):
    pass


class SpliceMismatchError(KakeyaError):
    """The segment movement does not end at the splice motion."""


class BoundPreconditionError(KakeyaError):
    """Inputs fall outside the regime where a quantitative bound applies."""


class BetaTooFarError(BoundPreconditionError):
    pass


class SegmentTooFarError(BoundPreconditionError):
    pass


class SceneOutOfBoundsError(KakeyaError):
    pass


class GridMismatchError(KakeyaError):
    pass


class NotParallelError(KakeyaError):
    pass


class NotConcentricError(KakeyaError):
    pass


class SlatsDontFitError(KakeyaError):
    pass


class PointOnCurveError(KakeyaError):
    pass


class TrajectoryEscapeError(KakeyaError):
    pass
