"""Exception types.

Every error carries a short machine-readable ``kind`` string (``"shape"``,
``"not-hermitian"``, ``"incomplete"``, ...) so callers and the CLI can branch
on it without parsing messages.
"""

from __future__ import annotations


class AfterMeasureError(ValueError):
    """Base class for all library errors."""

    def __init__(self, kind: str, message: str | None = None) -> None:
        self.kind = kind
        super().__init__(f"{kind}: {message}" if message else kind)


class ValidationError(AfterMeasureError):
    """Input does not satisfy the contract of an operation."""


class NumericalError(AfterMeasureError):
    """A computation was attempted but is numerically ill-posed."""
