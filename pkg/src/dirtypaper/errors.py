"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class DegenerateError(ValueError):
    """Input makes the requested quantity undefined (zero pilots, Delta = 1, ...)."""


class UnsatisfiableError(ValueError):
    """No integer in the search range satisfies a design constraint."""


class ConvergenceError(ArithmeticError):
    """A numerical procedure did not reach its tolerance."""
