"""JSON sink for reports, manifests and run summaries."""

import json
from pathlib import Path
from typing import Any

import numpy as np
import structlog

from atvr.sinks.base import Sink

logger = structlog.get_logger(__name__)


def _default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return value.as_posix()
    return str(value)


def dumps(document: Any) -> str:
    """Sorted keys, indent 2, trailing newline."""
    return json.dumps(document, indent=2, sort_keys=True, default=_default) + "\n"


class JSONSink(Sink):
    """
    Writes buffered records as a JSON list, or the single record itself when
    `single` is set.
    """

    def __init__(self, path: str | Path, single: bool = False):
        super().__init__(path)
        self.single = single
        self.records: list[dict[str, Any]] = []

    def emit(self, row: dict[str, Any]) -> None:
        self.records.append(row)

    def flush(self) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.single:
            document: Any = self.records[-1] if self.records else {}
        else:
            document = self.records
        self.path.write_text(dumps(document), encoding="utf-8")
        logger.info("Wrote JSON", path=str(self.path), records=len(self.records))
        return self.path
