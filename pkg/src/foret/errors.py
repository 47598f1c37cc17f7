"""Exception types shared across the package."""


class ForetError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(ForetError):
    """Malformed or inconsistent JSON input (forests, instances, artifacts)."""


class SpaceMismatchError(ForetError):
    """Objects over different feature spaces were mixed in one operation."""


class WorldCapError(ForetError):
    """A world-enumeration was requested over a space above the configured cap."""


class BudgetError(ForetError):
    """A node-count or time budget was exhausted during graph construction."""


class ResultCapError(ForetError):
    """An enumeration (terms, clauses, flips) exceeded its result-size cap."""


class NotInClassError(ForetError):
    """The instance does not satisfy the class formula it is being explained against."""


class TargetClassError(ForetError):
    """A contrastive query targeted a class the instance already belongs to."""


class RestrictInfeasibleError(ForetError):
    """Restricting a decision graph left its root with no feasible edge."""
