"""Exception hierarchy for repsim."""


class RepSimError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(RepSimError, ValueError):
    pass


class NonFiniteValue(InvalidArgument):
    pass


class ColumnMismatch(InvalidArgument):
    """Two layers were given over different numbers of datapoints."""


class ShapeMismatch(InvalidArgument):
    pass


class NotSymmetric(InvalidArgument):
    pass


class AllEigenvaluesNegligible(RepSimError):
    pass


class ConvergenceFailure(RepSimError):
    pass


class DegenerateInput(RepSimError):
    pass


class ZeroNorm(DegenerateInput):
    pass


class ZeroVariance(DegenerateInput):
    pass


class InsufficientRank(RepSimError):
    pass


class CountTooLarge(InvalidArgument):
    pass


class NumericalOverflow(RepSimError):
    pass


class DivergenceDetected(RepSimError):
    pass


class UnsupportedFormat(RepSimError):
    pass


class MalformedHeader(UnsupportedFormat):
    pass


class IoFailure(RepSimError, OSError):
    pass
