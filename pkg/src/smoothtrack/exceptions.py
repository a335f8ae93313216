"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` (an ``ArithmeticError``);
bad arguments raise ``ValueError`` subclasses.  The CLI maps the former to exit
code 1 and the latter to exit code 2.
"""


class NumericalError(ArithmeticError):
    """A solver could not produce a trustworthy answer."""


class SingularMatrixError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class InstabilityError(NumericalError):
    """A matrix expected to be Hurwitz has an eigenvalue with Re >= 0."""


class DegenerateGainError(NumericalError):
    """The last gain entry vanishes, so the limiting bias is unbounded."""


class BracketError(NumericalError):
    """The cost was still decreasing at the upper end of the search range."""


class OrderError(ValueError):
    """Smoothness order outside the supported range."""


class ClassViolationError(ValueError):
    """A test signal violates the Lipschitz bound on its k-th derivative."""
