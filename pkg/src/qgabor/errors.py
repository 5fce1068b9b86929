"""Exception and warning types raised across the package."""


class QGError(Exception):
    """Base class for computation errors (CLI exit code 1)."""


class SingularBasis(QGError):
    pass


class UnknownRule(QGError):
    pass


class EmptyPointSet(QGError):
    pass


class RegionTooSmall(QGError):
    pass


class BallExceedsRegion(QGError):
    pass


class NoConvergence(QGError):
    pass


class PerturbationFailed(QGError):
    pass


class OverlappingTranslate(QGError):
    pass


class NyquistViolation(QGError):
    pass


class DegenerateInterior(QGError):
    pass


class FrameOperatorSingular(QGError):
    pass


class IncompatibleKernels(QGError):
    pass


class OffGrid(QGError):
    """A time-frequency point does not sit on the discrete phase-space grid."""


class NotLatticeSubset(QGError):
    pass


class NoMarks(QGError):
    pass


class EmptyWindowWarning(UserWarning):
    """Cut-and-project window of zero volume; the generated set is empty."""
