"""Exception hierarchy.

Every error carries the process exit code the CLI reports for it:
1 config, 2 parse, 3 provider, 4 validation.
"""

from __future__ import annotations


class DramacutError(Exception):
    exit_code = 4


class ConfigError(DramacutError):
    exit_code = 1


class ParseError(DramacutError):
    """An LLM reply could not be turned into validated records."""

    exit_code = 2

    def __init__(self, message: str, record_index: int | None = None):
        super().__init__(message)
        self.record_index = record_index


class NoResultBlock(ParseError):
    pass


class Malformed(ParseError):
    pass


class SchemaViolation(ParseError):
    pass


class ProviderError(DramacutError):
    exit_code = 3


class ValidationError(DramacutError, ValueError):
    exit_code = 4


class UndefinedIoU(ValidationError):
    pass


class CorrectionRejected(ValidationError):
    pass


class CaptionError(DramacutError):
    pass


class MemoryLookupError(ValidationError, KeyError):
    pass


class ClipSkipped(DramacutError):
    """Boundary filtering left a clip without openings or endings."""


class EmptyHighlights(ValidationError):
    pass


class NoWindows(ValidationError):
    pass


class ExportError(ValidationError):
    pass


class LoadError(ValidationError):
    """A file failed schema validation; ``pointer`` is the JSON pointer of the offending node."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer
