"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature ran out of budget before meeting its tolerance.

    The best estimate reached so far is kept in ``estimate``.
    """

    def __init__(self, message, estimate=float("nan")):
        super().__init__(message)
        self.estimate = estimate


class SingularityError(ArithmeticError):
    """A Gram matrix was too ill-conditioned to invert for a precoder."""

    def __init__(self, message, scheme=None, trial=None):
        super().__init__(message)
        self.scheme = scheme
        self.trial = trial


class ConfigurationError(ValueError):
    """A simulation or sweep configuration is invalid or unsupported."""
