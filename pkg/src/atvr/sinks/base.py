"""Base sink interface."""

from abc import ABC, abstractmethod
from collections.abc import Iterable
from pathlib import Path
from typing import Any


class Sink(ABC):
    """Base interface for artifact sinks."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    @abstractmethod
    def emit(self, row: dict[str, Any]) -> None:
        """Buffer a single record."""

    def emit_many(self, rows: Iterable[dict[str, Any]]) -> None:
        for row in rows:
            self.emit(row)

    @abstractmethod
    def flush(self) -> Path:
        """Write buffered records and return the file path."""
