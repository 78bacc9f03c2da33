"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SarchError(Exception):
    """Base class for all errors raised by this package."""


class ExtractionParseError(SarchError):
    """Malformed extraction file. Carries the position of the first bad byte."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DocumentValidationError(SarchError):
    """Structurally valid file whose content violates a document invariant."""


class ProviderError(SarchError):
    """Embedding/classification provider failure.

    ``retriable`` is True for transport-level failures (timeouts, 5xx) where
    a retry against the same endpoint could succeed.
    """

    def __init__(
        self,
        message: str,
        *,
        retriable: bool = False,
        endpoint: str | None = None,
        status: int | None = None,
    ):
        detail = message
        if endpoint is not None:
            detail = f"{detail} [endpoint={endpoint}]"
        if status is not None:
            detail = f"{detail} [status={status}]"
        super().__init__(detail)
        self.retriable = retriable
        self.endpoint = endpoint
        self.status = status


class RetrievalError(SarchError):
    """A query cannot be answered, e.g. no vector store for its modality."""


class IndexingError(SarchError):
    """Corpus could not be indexed (duplicate ids, missing bundles, provider failure)."""


class PersistenceError(SarchError):
    """Index file is unreadable: bad magic, unsupported version, or truncation."""


class ConfigError(SarchError):
    """Service configuration file or environment override is invalid."""
