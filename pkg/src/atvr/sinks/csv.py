"""CSV sink with a fixed header."""

from pathlib import Path
from typing import Any

import pandas as pd
import structlog

from atvr.core.errors import InvalidInputError
from atvr.sinks.base import Sink

logger = structlog.get_logger(__name__)


class CSVSink(Sink):
    """
    Writes rows under a column order fixed at construction, so the header
    never depends on which keys the rows happen to carry.
    """

    def __init__(self, path: str | Path, columns: list[str]):
        super().__init__(path)
        self.columns = list(columns)
        self.rows: list[dict[str, Any]] = []

    def emit(self, row: dict[str, Any]) -> None:
        missing = [c for c in self.columns if c not in row]
        if missing:
            raise InvalidInputError("CSV row is missing columns", {"missing": missing, "path": str(self.path)})
        self.rows.append({c: row[c] for c in self.columns})

    def flush(self) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(self.rows, columns=self.columns)
        frame.to_csv(self.path, index=False, encoding="utf-8", lineterminator="\n")
        logger.info("Wrote CSV", path=str(self.path), rows=len(self.rows))
        return self.path
