"""Exception hierarchy shared by all qptrace modules."""


class QPTraceError(Exception):
    """Base class for every error raised by qptrace."""


class InvalidInputError(QPTraceError, ValueError):
    pass


class NumericFailure(QPTraceError, ArithmeticError):
    pass


class OutOfDomainError(QPTraceError, ArithmeticError):
    """exp(-h*s) would overflow double precision."""


class SingularSensitivityError(QPTraceError, ArithmeticError):
    pass


class BoundaryPoleError(QPTraceError, ArithmeticError):
    """b(s) vanishes on the boundary point, so no crossing is possible there."""


class DegenerateCrossingError(QPTraceError, ArithmeticError):
    pass


class DefectPointError(QPTraceError, ArithmeticError):
    """f_s vanishes (numerically) along a trajectory."""


class VerificationUnavailable(QPTraceError):
    """The oracle could not produce a trustworthy answer. Never a wrong count."""


class ContourTooCloseError(VerificationUnavailable):
    pass


class PhaseAmbiguityError(VerificationUnavailable):
    pass


class NoZeroNearSeedError(QPTraceError, ArithmeticError):
    pass
