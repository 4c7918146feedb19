"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SqueryError(Exception):
    """Base class for all errors raised by this package."""


class SourceError(SqueryError):
    """An error tied to a location in scenario source text."""

    def __init__(self, message: str, line: int = 0, column: int = 0,
                 filename: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.filename = filename
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.filename or "<scenario>"
        if self.line:
            return "%s:%d:%d: %s" % (where, self.line, self.column, self.message)
        return "%s: %s" % (where, self.message)


class ScenarioSyntaxError(SourceError):
    """Malformed scenario text."""


class UnsupportedFeatureError(SourceError):
    """Syntactically recognizable construct outside the supported fragment."""


class SemanticError(SourceError):
    """Well-formed text with inconsistent meaning (bad reference, type clash)."""


class TranslationError(SqueryError):
    """Behavior could not be compiled to a state machine."""


class UnknownStateError(SqueryError):
    """A state id does not occur in the machine bundle."""


class UnsupportedGuardError(SqueryError):
    """A guard expression falls outside what the evaluator can decide."""


class DomainError(SqueryError):
    """A numeric operation left its domain (zero-length direction, etc.)."""


class MissingFeatureError(SqueryError):
    """The trace lacks a feature (object, lane id) a predicate needs."""


class FormatError(SqueryError):
    """A file could not be decoded as the expected format."""


class ValidationError(SqueryError):
    """Decoded data violates a structural invariant."""


class ConfigError(SqueryError):
    """Invalid query or generator configuration."""


class BudgetExceededError(SqueryError):
    """An enumeration exceeded its configured budget."""


class UnsatisfiableSceneError(SqueryError):
    """Rejection sampling could not place the declared objects."""


class NoAdjacentLaneError(SqueryError):
    """A lane change was requested where the map offers no neighbor lane."""
