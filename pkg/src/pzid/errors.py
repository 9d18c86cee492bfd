"""Exception types shared across the toolkit."""


class PzidError(Exception):
    """Base class for toolkit errors."""


class NumericError(PzidError):
    """A numerical procedure failed (singular system, defective eigenproblem, ...)."""


class UsageError(PzidError):
    """Inputs violate a documented precondition."""
