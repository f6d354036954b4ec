"""Exception hierarchy shared by every module."""


class MixedRegError(Exception):
    """Base class for all errors raised by mixedreg."""


class InvalidInputError(MixedRegError, ValueError):
    """An argument violates a documented precondition."""


class ConvergenceError(MixedRegError, ArithmeticError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NumericInconsistencyError(MixedRegError, ArithmeticError):
    """Computed quantities contradict each other beyond tolerance."""


class DegenerateEventError(MixedRegError, ArithmeticError):
    """A Monte-Carlo conditioning event was never observed."""
