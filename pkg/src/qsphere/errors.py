"""Exception types shared across the package."""


class QSphereError(Exception):
    """Base class for all package errors."""


class DomainError(QSphereError, ValueError):
    pass


class PoleError(QSphereError, ValueError):
    pass


class AccuracyError(QSphereError, ArithmeticError):
    pass


class InsufficientDataError(QSphereError, ValueError):
    pass


class ValidationError(QSphereError, ValueError):
    pass


class SizeError(QSphereError, ValueError):
    pass


class SingularityError(QSphereError, ZeroDivisionError):
    """A q-number denominator vanished inside a CG formula.

    Carries the 1-based indices (a, i, j, k) of the offending factor.
    """

    def __init__(self, msg, a=None, i=None, j=None, k=None):
        super().__init__(msg)
        self.a, self.i, self.j, self.k = a, i, j, k


class UnsupportedRankError(QSphereError, ValueError):
    pass


class FormError(QSphereError, ValueError):
    pass


class AbscissaError(QSphereError, ValueError):
    pass


class ConsistencyError(QSphereError, AssertionError):
    pass
