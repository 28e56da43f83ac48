class DomainError(ValueError):
    """Input outside the region where a quantity is defined."""


class IterationLimitError(RuntimeError):
    """A bracketing or bisection loop hit its iteration cap."""


class InsufficientSamplesError(ValueError):
    """Too few Monte Carlo samples for a stable tail estimate."""
