"""Shared exception types."""


class MirlabError(Exception):
    """Base class for all library-raised errors."""


class ParseError(MirlabError):
    """Instance or distribution file could not be interpreted."""


class InvariantViolation(MirlabError):
    """Structurally invalid data; `field` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnboundedError(MirlabError):
    """LP or relaxation has no finite optimum for the given costs."""


class InfeasibleError(MirlabError):
    """No feasible point exists for the given right-hand side."""


class BudgetExhausted(MirlabError):
    """Branch-and-bound node budget hit before proving optimality."""


class EmptyDualSet(MirlabError):
    """No dual feasible basis for the given cost vector."""
