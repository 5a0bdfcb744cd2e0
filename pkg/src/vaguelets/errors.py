"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """A hypothesis required by an operation does not hold."""


class CatalogLookupError(KeyError):
    """Unknown test-function label."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message, last_estimate=None, iterations=None):
        super().__init__(message)
        self.last_estimate = last_estimate
        self.iterations = iterations
