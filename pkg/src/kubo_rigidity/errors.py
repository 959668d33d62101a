"""Exception types shared across the package."""


class ContractError(ValueError):
    """A precondition on shapes, dimensions or parameters was violated."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap."""


class UndecidableError(ValueError):
    """The requested cone membership is not decidable by the available criteria."""
