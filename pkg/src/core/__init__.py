"""
Core components for the conflict checker.

This subpackage contains the error hierarchy, the seeded random streams and
the parametric distributions every other subpackage builds on.
"""

from .errors import (
    ConfigError, ConflictCheckError, NumericalAbortError, OrderOutOfRangeError,
    UnsupportedOperationError, ValidationError,
)
from .rng import make_rng, replicate_rng

__all__ = [
    'ConfigError', 'ConflictCheckError', 'NumericalAbortError', 'OrderOutOfRangeError',
    'UnsupportedOperationError', 'ValidationError', 'make_rng', 'replicate_rng',
]
