"""Exception types shared across the package."""

from __future__ import annotations


class InvalidArgument(ValueError):
    """An argument violates a documented precondition."""


class TableTooSmall(ValueError):
    """A prime table does not reach far enough for the request."""

    def __init__(self, message: str, required_limit: int):
        super().__init__(f"{message} (required limit about {required_limit})")
        self.required_limit = required_limit


class GcdFailure(ValueError):
    """Inputs that had to be coprime share the factor ``gcd``."""

    def __init__(self, message: str, gcd: int):
        super().__init__(f"{message} (gcd={gcd})")
        self.gcd = gcd


class NotFound(LookupError):
    """A search terminated without a result."""


class TooLarge(ValueError):
    """An exhaustive computation would exceed its work budget."""


class PropertyFailure(AssertionError):
    """A checked mathematical property failed; ``witness`` locates it."""

    def __init__(self, message: str, witness: object = None):
        super().__init__(message if witness is None else f"{message}: {witness!r}")
        self.witness = witness


class LemmaViolation(PropertyFailure):
    """The exponent classifier reached a tuple that fits no case."""
