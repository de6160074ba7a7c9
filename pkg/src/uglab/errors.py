"""Exception types shared across the package."""


class UglabError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(UglabError):
    """An argument is outside the operation's allowed domain."""


class PreconditionError(UglabError):
    """A structural precondition on the input does not hold."""


class NotInSpanError(UglabError):
    """A target vector is not in the span of the given vectors."""


class IncompleteAssignmentError(UglabError):
    """An assignment is missing a vertex the instance requires."""


class SearchBudgetError(UglabError):
    """An exhaustive search would exceed its configured budget."""


class ConvergenceError(UglabError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    Carries the best iterate found so far in ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class StrategyViolationError(UglabError):
    """A game strategy broke one of its runtime invariants.

    ``side`` names the offending player, ``detail`` carries diagnostics.
    """

    def __init__(self, message, side="duplicator", detail=None):
        super().__init__(message)
        self.side = side
        self.detail = detail or {}
