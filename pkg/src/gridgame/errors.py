"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented invariant (bad distribution,
    inconsistent trace, out-of-range decision, ...)."""


class UndefinedFitError(ValueError):
    """Raised when a deviation metric is undefined for the given data
    (no days with inventory, or a zero PD denominator)."""


class SessionNotFound(KeyError):
    """Raised by the session store for unknown session ids."""


class SessionConflict(RuntimeError):
    """Raised when a decision cannot be applied to the session's current day
    (duplicate submission, stale day, or completed session)."""
