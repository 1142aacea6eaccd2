"""Exception hierarchy shared by the engines and the CLI."""


class ReceiverError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ReceiverError, ValueError):
    """A parameter is outside the physical domain of the model."""


class InvalidPriorError(DomainError):
    """Closed-form error formulas are only defined for equal priors."""


class DegenerateInputError(DomainError):
    """The optimisation problem has no unique solution for these inputs."""


class SingularInputError(DomainError):
    """The optimality condition is singular for these inputs."""


class InvalidBracketError(DomainError):
    pass


class NoSignChangeError(DomainError):
    pass


class ConvergenceError(ReceiverError, ArithmeticError):
    """An iterative solver did not meet its tolerance within the iteration cap."""


class ConsistencyError(ReceiverError, AssertionError):
    """A formula produced a value outside its mathematically guaranteed range.

    This always indicates a bug, never a physical regime.
    """
