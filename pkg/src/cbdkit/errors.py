"""Exception types shared across the package."""


class CbdError(Exception):
    """Base class for all errors raised by cbdkit."""


class ValidationError(CbdError, ValueError):
    """Malformed input: a system file, a linear program, a function text."""


class SizeCapError(CbdError):
    """A program would need more unknowns than the configured cap allows."""

    def __init__(self, required, allowed):
        self.required = required
        self.allowed = allowed
        super().__init__(
            f"outcome space too large: {required} outcomes required, "
            f"{allowed} allowed")


class DomainError(CbdError):
    """Operation is undefined for this (otherwise valid) input."""


class EvaluationError(DomainError):
    """A connection function could not be evaluated on some outcome."""
