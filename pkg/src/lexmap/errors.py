"""Exception hierarchy. Exit codes: 2 config, 3 provider, 4 data."""

from __future__ import annotations


class LexmapError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class ConfigError(LexmapError):
    """Invalid or inconsistent configuration (bad paths, dim mismatch, thresholds)."""

    exit_code = 2


class ProviderError(LexmapError):
    """A remote provider failed after retries.

    Carries retry metadata so callers can report or resume.
    """

    exit_code = 3

    def __init__(self, message, *, attempts=0, last_status=None):
        super().__init__(message)
        self.attempts = attempts
        self.last_status = last_status


class MissingVectorError(ProviderError):
    """A precomputed-vector file has no entry for a requested text."""


class DataError(LexmapError):
    """Malformed or unusable input data."""

    exit_code = 4


class InvalidDocumentError(DataError):
    """Raw complaint text cannot be parsed (e.g. empty input)."""


class EmptyCorpusError(DataError):
    """An operation that needs at least one complaint got none."""


class SeedBankError(DataError):
    """Seed-bank file is malformed or incomplete (a factor has no seeds)."""
