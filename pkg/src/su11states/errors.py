"""Exception hierarchy shared across the package."""


class SU11Error(Exception):
    """Base class for all errors raised by su11states."""


class ParameterError(SU11Error, ValueError):
    """A family, scheme or CLI parameter lies outside its admissible range."""


# specfun
class DivergentSeries(SU11Error, ArithmeticError):
    pass


class ZeroDenominator(SU11Error, ZeroDivisionError):
    pass


# fock
class TruncationTooSmall(SU11Error):
    pass


class NonNormalizable(SU11Error):
    pass


class ResidualTooLarge(SU11Error):
    pass


# algebra
class DegenerateKilling(ParameterError):
    pass


class BoundaryCase(ParameterError):
    pass


class ForbiddenRegion(ParameterError):
    pass


class NonRealR(ParameterError):
    pass


class TauOutOfDisk(ParameterError):
    pass


# moments
class SingularS(SU11Error, ArithmeticError):
    pass


class ParamOutOfRange(ParameterError):
    pass


# scheme
class ZeroMixing(ParameterError):
    pass


class NegligibleOutcome(SU11Error):
    pass


class InconsistentTransform(ParameterError):
    pass
