"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "LitdexError",
    "CorpusError",
    "IndexLoadError",
    "IndexVersionError",
    "IndexChecksumError",
    "ScorerUnavailable",
    "EmbedderUnavailable",
    "ConfigError",
]


class LitdexError(Exception):
    """Base class for all litdex errors."""


class CorpusError(LitdexError):
    """A corpus file is malformed or violates the article schema."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class IndexLoadError(LitdexError):
    """An on-disk index is missing files or internally inconsistent."""


class IndexVersionError(IndexLoadError):
    """The on-disk index format version is not supported by this build."""


class IndexChecksumError(IndexLoadError):
    """An index payload file does not match its recorded checksum."""


class ScorerUnavailable(LitdexError):
    """The external relevance scorer could not produce scores."""


class EmbedderUnavailable(LitdexError):
    """The external token embedder could not produce vectors."""


class ConfigError(LitdexError):
    """The service configuration is invalid."""
