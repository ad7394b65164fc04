"""Exception hierarchy.

Every error carries a short machine-readable ``code`` (used in CLI
diagnostics) and an ``exit_status`` for the command-line front end.
"""


class SearchModelError(Exception):
    code = "internal"
    exit_status = 5


class DomainError(SearchModelError, ValueError):
    code = "domain"


class ValidationError(SearchModelError, ValueError):
    """A config or strategy object violates one of its invariants."""

    code = "validation-error"
    exit_status = 3

    def __init__(self, invariant, message=None):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}" if message else invariant)


class ParseError(SearchModelError, ValueError):
    code = "parse-error"
    exit_status = 2

    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class IdentityInapplicable(SearchModelError, ValueError):
    code = "identity-inapplicable"


class DegenerateDispersion(SearchModelError):
    """No buyer observes exactly one price, so a dispersed law cannot exist."""

    code = "degenerate-dispersion"


class Degenerate(SearchModelError):
    code = "degenerate"


class OutOfSupport(SearchModelError, ValueError):
    code = "out-of-support"


class NoOligopoly(SearchModelError):
    code = "no-oligopoly"
    exit_status = 4


class NoEquilibrium(SearchModelError):
    code = "no-equilibrium"
    exit_status = 4


class CostTooLarge(NoEquilibrium):
    code = "cost-too-large"

    def __init__(self, threshold, message=None):
        self.threshold = threshold
        super().__init__(message or f"search cost exceeds threshold {threshold:.12g}")


class InvalidShift(SearchModelError, ValueError):
    code = "invalid-shift"
    exit_status = 3


class InvalidEquilibrium(SearchModelError, ValueError):
    code = "invalid-equilibrium"
