"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Input data violates a documented precondition."""


class ModulusRangeError(InvalidInputError):
    """A value falls outside the range on which a modulus (or its inverse) is tabulated."""


class SizeLimitError(InvalidInputError):
    """Exhaustive computation refused because the instance is too large."""


class NotATreeError(Exception):
    """The contracted graph contains a cycle, so no tree factorization exists.

    ``cycle`` lists class indices around the offending cycle and
    ``vertex_cycle`` a closed vertex path in the original graph realizing it.
    """

    def __init__(self, message, cycle=(), vertex_cycle=()):
        super().__init__(message)
        self.cycle = list(cycle)
        self.vertex_cycle = list(vertex_cycle)
