"""Exception types shared by all pinchlab modules."""


class ValidationError(ValueError):
    """Input violates a documented precondition (bad value, bad config key)."""


class StructureError(ValidationError):
    """Combinatorial structure is unusable (disconnected graph, bad indices)."""


class ConvergenceError(RuntimeError):
    """A numerical routine failed to converge; carries diagnostics in args."""
