"""Shared exception types."""

from __future__ import annotations


class ConfigError(ValueError):
    """A configuration value violates an invariant; message names the field."""


class SnapshotError(ValueError):
    """A weight snapshot is missing, truncated, or inconsistent."""

    def __init__(self, message: str, code: str = "snapshot_error"):
        super().__init__(message)
        self.code = code


class LogParseError(ValueError):
    """A trial log file cannot be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
