"""Exception types shared across the package."""


class PresbError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PresbError):
    """Malformed formula text. Carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class EvaluationError(PresbError):
    """Evaluation hit an unbound variable or a quantifier."""


class DomainError(PresbError):
    """A point violates a map's or function's domain constraints."""


class ArityError(PresbError):
    """Mismatched arities in map composition or application."""


class NotABijectionError(PresbError):
    """A certificate was requested for a map that is not a bijection."""


class EmptyOrFiniteError(PresbError):
    """Operation requires an infinite set (e.g. classification)."""


class UnsatisfiableError(PresbError):
    """Operation requires a satisfiable formula."""


class PieceLimitError(PresbError):
    """Cell count exceeds the configured cap for subset enumeration."""
