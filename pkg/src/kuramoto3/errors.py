"""Exception hierarchy."""


class Kuramoto3Error(Exception):
    """Base class for all package errors."""


class InvalidCoupling(Kuramoto3Error, ValueError):
    pass


class NotPresent(Kuramoto3Error, LookupError):
    """Requested critical point does not exist for the given coupling."""


class NonSymmetric(Kuramoto3Error, ValueError):
    pass


class StepUnderflow(Kuramoto3Error, ArithmeticError):
    """Adaptive step size collapsed below the allowed minimum."""


class DomainError(Kuramoto3Error, ValueError):
    pass


class PreconditionFailed(Kuramoto3Error, ValueError):
    pass
