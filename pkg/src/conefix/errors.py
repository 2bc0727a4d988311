"""Exception types shared across the package."""


class ConefixError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ConefixError):
    """Operands do not match the declared space dimension."""


class DomainError(ConefixError):
    """A point (or a mapped point) left the declared domain box."""


class ConstraintError(ConefixError):
    """A structural or parameter constraint is violated."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
