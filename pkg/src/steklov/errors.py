"""Exception hierarchy shared by every module of the package."""


class SteklovError(Exception):
    """Base class for all errors raised by the package."""


class ConfigError(SteklovError, ValueError):
    """Malformed identifier, unknown key, or out-of-range parameter."""


class InputError(SteklovError, ValueError):
    """Unreadable or inconsistent external data (e.g. a CSV signal)."""


class NumericalError(SteklovError, ArithmeticError):
    """A numerical procedure did not reach its tolerance.

    ``estimate`` and ``residual`` carry the best value obtained and the
    achieved error so callers can decide whether to accept it anyway.
    """

    def __init__(self, message, estimate=None, residual=None):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual


class QuadratureError(NumericalError):
    """Adaptive quadrature ran out of panels or growth steps."""


class NonFiniteIntegrand(QuadratureError):
    """The integrand overflowed or produced NaN on some panel."""


class MembershipError(SteklovError):
    """A function is not (numerically) a member of the requested Orlicz space."""
