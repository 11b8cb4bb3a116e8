"""Exception types raised by the model, equilibrium and Keen modules."""


class MinskyError(Exception):
    """Base class for all errors raised by :mod:`minskylab`."""


class DomainError(MinskyError, ValueError):
    """An argument lies outside the range where the quantity is defined."""


class SingularityError(MinskyError, ArithmeticError):
    """The growth-rate denominator ``nu - d`` (or a similar pole) vanished."""


class ConvergenceError(MinskyError, RuntimeError):
    """An iterative routine failed to meet its tolerance."""


class NoRootError(MinskyError, ValueError):
    """A scalar equation has no root on the admissible bracket."""


class DivergentDebtError(MinskyError, ArithmeticError):
    """The Keen fixed-point debt ratio is infinite (zero productivity growth)."""


class ConfigError(MinskyError, ValueError):
    """A scenario configuration file is malformed.

    ``key`` names the offending entry so command-line diagnostics can point at it.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
