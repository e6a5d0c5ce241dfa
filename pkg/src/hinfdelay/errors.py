"""Exception hierarchy shared by all modules."""


class HinfDelayError(Exception):
    """Base class for every error raised by this package."""


# quasipoly
class ReflectOnDelayed(HinfDelayError):
    pass


# winding
class PhaseStepTooLarge(HinfDelayError):
    pass


class ZeroSample(HinfDelayError):
    pass


class NonIntegerWinding(HinfDelayError):
    pass


class DegreeNotRetarded(HinfDelayError):
    """Quasi-polynomial whose high-frequency behaviour is not dominated by
    the delay-free term, so a finite contour cannot bound its zero count."""


# sensopt
class InvalidWeight(HinfDelayError, ValueError):
    pass


class InvalidPlant(HinfDelayError, ValueError):
    pass


class GammaOutOfRange(HinfDelayError, ValueError):
    pass


class NoBracket(HinfDelayError):
    pass


class InnerCheckFailed(HinfDelayError):
    pass


class BistableCheckFailed(HinfDelayError):
    pass


class EncirclementPatternAbsent(HinfDelayError):
    pass


# envelope
class EnvelopeIntervalEmpty(HinfDelayError):
    pass


class NoFeasibleAlpha1(HinfDelayError):
    pass


# strongstab
class Gamma2OutOfRange(HinfDelayError, ValueError):
    pass


class NoRootInInterval(HinfDelayError):
    pass


class QhatIdenticallyZero(HinfDelayError):
    pass


class IdentityMismatch(HinfDelayError):
    pass


# youla
class InterpolationIllConditioned(HinfDelayError):
    pass


class NotConjugateSymmetric(HinfDelayError):
    pass


class DegenerateDenominator(HinfDelayError):
    pass


# cli
class SpecParseError(HinfDelayError):
    pass


class SpecValidationError(HinfDelayError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class OutputUnwritable(HinfDelayError):
    pass
