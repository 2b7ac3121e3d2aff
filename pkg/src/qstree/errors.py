"""Exception types raised across the package."""


class QsTreeError(Exception):
    """Base class for all package errors."""


class InvalidPoint(QsTreeError):
    pass


class DegenerateTree(QsTreeError):
    pass


class LeafInCutSet(QsTreeError):
    pass


class NotASuperset(QsTreeError):
    pass


class BudgetExceeded(QsTreeError):
    pass


class NotWordAddressed(QsTreeError):
    pass


class EmptyLevel(QsTreeError):
    pass


class BudgetTooShallow(QsTreeError):
    pass


class DegenerateMetric(QsTreeError):
    pass


class NoFeasibleDelta(QsTreeError):
    def __init__(self, message, trail=None):
        super().__init__(message)
        self.trail = trail or []


class NotEdgeLike(QsTreeError):
    pass


class MarkNotInLeafTile(QsTreeError):
    pass


class NotTrivalent(QsTreeError):
    pass


class PreconditionNotVerified(QsTreeError):
    pass


class DepthExceeded(QsTreeError):
    pass


class NotAnExcursion(QsTreeError):
    pass


class SchemaError(QsTreeError):
    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
