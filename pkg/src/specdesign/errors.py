"""Exception types shared by all modules."""


class ValidationError(ValueError):
    """A precondition on inputs or configuration is violated."""


class SingularityError(ArithmeticError):
    """A transformation denominator vanished; the requested potential is singular.

    Carries the coordinate where the denominator collapsed when known.
    """

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class NumericalFailure(RuntimeError):
    """An iterative scheme failed to converge or lost too much precision."""
