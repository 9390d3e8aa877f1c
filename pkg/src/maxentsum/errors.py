"""Exception types shared across the package."""


class MaxentsumError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MaxentsumError, ValueError):
    """A probability or weight vector failed validation."""


class DomainError(MaxentsumError, ValueError):
    """An argument lies outside an operation's documented domain."""


class NotASpecialCaseError(DomainError):
    """No closed-form expression exists for the requested (n, r)."""


class PreconditionError(MaxentsumError, ValueError):
    """A check was invoked on input that violates its stated precondition."""


class BudgetExceededError(MaxentsumError, RuntimeError):
    """An exhaustive enumeration would exceed the configured budget."""
