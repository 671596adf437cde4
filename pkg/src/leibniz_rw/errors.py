"""Error types shared by all stages of the pipeline.

Every error carries a stable code (its class name) and, when known, a
source position, so the CLI can print one grep-able diagnostic per line.
"""

from __future__ import annotations


class LeibnizError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, *, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    @property
    def code(self) -> str:
        return type(self).__name__

    def at(self, line: int, col: int) -> "LeibnizError":
        """Return self with a position attached (first position wins)."""
        if self.line is None:
            self.line = line
            self.col = col
        return self

    def diagnostic(self, path: str) -> str:
        line = self.line if self.line is not None else 0
        col = self.col if self.col is not None else 0
        return f"{path}:{line}:{col}: {self.code}: {self.message}"


# sort graph
class CycleError(LeibnizError):
    pass


class UnknownSort(LeibnizError):
    pass


# signature / term formation
class ConflictError(LeibnizError):
    pass


class PreregularityError(LeibnizError):
    pass


class KindMismatch(LeibnizError):
    pass


class NoSuchOperator(LeibnizError):
    pass


class UnknownIdentifier(LeibnizError):
    pass


# concrete syntax
class ParseError(LeibnizError):
    """Malformed text; reported as code "ParseError" with a position."""

    pass


class AmbiguityError(LeibnizError):
    """Distinct infix operators mixed without parentheses."""

    pass


# rewriting
class StepLimitExceeded(LeibnizError):
    def __init__(self, message: str, term, trace):
        super().__init__(message)
        self.term = term
        self.trace = trace


class InvalidRule(LeibnizError):
    pass


# contexts
class DuplicateLabel(LeibnizError):
    pass


class UnknownLabel(LeibnizError):
    pass


class RenameCollision(LeibnizError):
    pass


class UnknownReference(LeibnizError):
    pass


# documents
class ImportNotFound(LeibnizError):
    pass


class ImportCycle(LeibnizError):
    pass


class SchemaError(LeibnizError):
    pass


# floating-point derivation
class UnmappedOperator(LeibnizError):
    def __init__(self, message: str, operator: str):
        super().__init__(message)
        self.operator = operator
