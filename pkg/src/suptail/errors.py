"""Exception hierarchy shared by all suptail modules.

The CLI maps these onto exit codes: validation problems exit 2, numeric or
embedding failures exit 3, memory-budget rejections exit 4.
"""


class SuptailError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SuptailError):
    """Bad configuration or arguments; names the offending field."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class RegimeError(ValidationError):
    """Operation applied to a horizon of the wrong heaviness regime."""


class NumericError(SuptailError):
    """Numerical failure (quadrature, overflow guard, table range)."""


class TableRangeError(NumericError):
    """Tabulated model or tail queried outside its tabulated range."""


class EmbeddingError(NumericError):
    """Circulant embedding not nonnegative definite within tolerance."""


class NonConvergenceError(NumericError):
    """Iterative estimate failed to stabilize; carries diagnostics."""

    def __init__(self, message: str, ladder=None):
        self.ladder = ladder
        super().__init__(message)


class DependencyError(NumericError):
    """A required precomputed constant is missing."""


class BudgetError(SuptailError):
    """A run would exceed the configured per-path memory budget."""
