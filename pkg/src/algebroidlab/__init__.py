"""algebroidlab: exact symbolic workbench for Courant/vertex algebroids and
Cech-de Rham characteristic cocycles on formal coordinate charts.

Everything is computed over the field of rational functions with exact
rational coefficients; no floating point is used anywhere.
"""

__version__ = "0.1.0"

from .ring import (
    Context,
    RatFunc,
    MultiPoly,
    RingError,
    ContextMismatch,
    DivisionByZero,
    UnknownVariable,
    DenominatorVanishes,
    ExpressionSyntaxError,
    ring_arith,
    partial,
    substitute,
    parse_scalar,
)

__all__ = [
    "__version__",
    "Context",
    "RatFunc",
    "MultiPoly",
    "RingError",
    "ContextMismatch",
    "DivisionByZero",
    "UnknownVariable",
    "DenominatorVanishes",
    "ExpressionSyntaxError",
    "ring_arith",
    "partial",
    "substitute",
    "parse_scalar",
]
