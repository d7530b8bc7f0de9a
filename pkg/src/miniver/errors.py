"""Shared error types."""

from __future__ import annotations


class MiniverError(Exception):
    """Base class for all errors raised by the pipeline."""


class ParseError(MiniverError):
    def __init__(self, message: str, span):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        return f"{self.span}: parse error: {self.message}"


class TypeError_(MiniverError):
    """A single type error. The typechecker reports these in lists rather
    than raising, except for internal misuse."""

    def __init__(self, category: str, message: str, span):
        super().__init__(message)
        self.category = category
        self.message = message
        self.span = span

    def __str__(self) -> str:
        return f"{self.span}: {self.category}: {self.message}"


class PolarityError(MiniverError):
    """A universal quantifier appeared in negative position."""


class CapacityError(MiniverError):
    """A solver input exceeded its size budget."""


class EvalError(MiniverError):
    """Formula evaluation failed (unbound variable, unexpected quantifier)."""


class MalformedBlockError(MiniverError):
    """A function body path missing its return reached VC generation."""
