"""Typed exceptions shared across the toolkit."""

from __future__ import annotations


class ShallowlabError(Exception):
    """Base class for every error raised by this package."""


class MalformedSSFError(ShallowlabError):
    """SSF input has a structural problem (bad rows, unbalanced chunk or
    sentence delimiters, duplicate sentence ids, undecodable bytes)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"line {line}, column {column}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownLabelError(ShallowlabError):
    """A POS or chunk label is not a member of the active tagset."""

    def __init__(self, label: str, location: str | None = None):
        self.label = label
        self.location = location
        message = f"unknown label {label!r}"
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class OutOfRangeError(ShallowlabError):
    """A count or index argument falls outside its permitted range."""


class InvalidEncodingError(ShallowlabError):
    """Raw input bytes are not valid UTF-8."""


class LengthMismatchError(ShallowlabError):
    """Two parallel sequences (tokens vs. tags or labels) differ in length."""


class EmptyTrainingSetError(ShallowlabError):
    """Training was requested on a corpus with no usable examples."""


class NonFiniteObjectiveError(ShallowlabError):
    """The training objective or gradient became NaN or infinite."""


class VersionMismatchError(ShallowlabError):
    """A model file declares a format version this build cannot read."""


class CorruptModelError(ShallowlabError):
    """A model file fails magic, checksum, or structural validation."""


class TokenMismatchError(ShallowlabError):
    """Gold and predicted corpora do not share the same token sequence;
    evaluation refuses to align heuristically."""


class InsufficientRatersError(ShallowlabError):
    """Agreement statistics need at least two raters."""


class DegenerateAgreementError(ShallowlabError):
    """Expected agreement is 1 while raters disagree; kappa is undefined."""
