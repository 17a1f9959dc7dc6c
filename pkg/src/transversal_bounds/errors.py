"""Exception hierarchy.

Every error raised by the package derives from :class:`TransversalError`.  The
three intermediate classes map onto CLI exit codes (validation 2, numerical 3,
guard 5).
"""


class TransversalError(Exception):
    pass


class ValidationError(TransversalError, ValueError):
    pass


class NumericalError(TransversalError, ArithmeticError):
    pass


class GuardError(TransversalError):
    pass


# model
class AsymmetricMatrix(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class BadDimension(ValidationError):
    pass


class SamePart(ValidationError):
    pass


# decomp
class CoverageMismatch(ValidationError):
    pass


class TooLarge(GuardError):
    pass


# lp
class NumericalFailure(NumericalError):
    pass


# canonicalize
class OptimalityViolation(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class NotCanonical(NumericalError):
    pass


class InfeasibleRecovery(NumericalError):
    pass


# bounds
class BadCycle(ValidationError):
    pass


# construct
class InfeasibleRounding(ValidationError):
    pass


# count
class Guard(GuardError):
    pass
