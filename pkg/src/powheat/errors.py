"""Exception hierarchy shared by all modules."""


class PowheatError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PowheatError, ValueError):
    """Invalid parameter value (bad exponent, non-finite coefficient, ...)."""


class ParameterMismatchError(ParameterError):
    """Two objects built for different exponents were combined."""


class DomainError(PowheatError, ValueError):
    """Evaluation point outside the domain of a solution or flow.

    ``bound`` names the violated constraint, e.g. ``"x>0"`` or ``"1-eps*t>0"``.
    """

    def __init__(self, message: str, bound: str | None = None, point=None):
        super().__init__(message)
        self.bound = bound
        self.point = point


class RangeError(PowheatError, ArithmeticError):
    """Result not representable (overflow) or argument too close to a singularity."""
