"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: precondition failures exit with 4,
indeterminate outcomes with 3.
"""


class SemifiniteError(Exception):
    """Base class for all library errors."""


class PreconditionError(SemifiniteError, ValueError):
    """An input violates a documented precondition; the call is refused."""


class TailUncertainError(PreconditionError):
    """The query falls in the unresolved tail of a truncated spectrum.

    ``bound`` is an interval ``(lo, hi)`` known to contain the true value.
    """

    def __init__(self, message, bound):
        super().__init__(message)
        self.bound = tuple(bound)


class ClassificationError(PreconditionError):
    """The spectrum is not in the ideal an operation requires."""


class IndeterminateError(SemifiniteError):
    """Numerics cannot decide the answer; diagnostics are attached."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class IllConditionedError(IndeterminateError):
    """Singular values cluster at the kernel threshold (no clean gap)."""
