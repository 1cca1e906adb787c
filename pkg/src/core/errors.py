"""
Exception hierarchy shared by every subpackage.

Parameter and data problems derive from ValueError so callers that only
know the standard library can still catch them.
"""

from typing import Any, Dict, Optional


class ConflictCheckError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(ConflictCheckError, ValueError):
    """Invalid parameters, data, selectors or weights."""


class OrderOutOfRangeError(ValidationError):
    """
    The requested Rényi order leaves the validity region of a family pair.

    Args:
        family: Name of the family pair, e.g. "beta".
        alpha: The offending order.
        detail: Which blended quantity failed and its value.
    """

    def __init__(self, family: str, alpha: float, detail: str):
        self.family = family
        self.alpha = alpha
        self.detail = detail
        super().__init__(f"Order alpha={alpha} is not usable for {family}: {detail}")


class UnsupportedOperationError(ConflictCheckError, NotImplementedError):
    """The model does not provide the requested capability."""


class NumericalAbortError(ConflictCheckError, ArithmeticError):
    """A computation produced too many non-finite values or failed to converge."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class ConfigError(ValidationError):
    """A command-line or config-file setting is invalid."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
