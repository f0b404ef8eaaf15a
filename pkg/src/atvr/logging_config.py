"""
Logging configuration.

Initializes structured logging using structlog with support for:
- JSON and console (colored) output formats
- Context variables for run-scoped metadata (experiment, seed)
- Optional JSON-lines file export
"""

import json
import logging
import re
import sys
from pathlib import Path
from typing import Any

import structlog
from structlog.types import Processor

from atvr.config.settings import LoggingSettings, get_settings

_ANSI = re.compile(r"\x1b\[[0-9;]*m")
_FILE_HANDLER_NAME = "atvr-file"


class JsonLineFormatter(logging.Formatter):
    """One JSON object per record for file export."""

    def format(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "level": record.levelname,
            "logger": record.name,
            "message": _ANSI.sub("", record.getMessage()),
        }
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, default=str)


def _configure_standard_logging(settings: LoggingSettings) -> None:
    # stderr keeps stdout free for command output.
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, settings.level, logging.INFO),
        force=True,
    )


def _get_processors(settings: LoggingSettings) -> list[Processor]:
    processors: list[Processor] = [
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.contextvars.merge_contextvars,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.dict_tracebacks,
    ]
    if settings.format == "json":
        processors.append(structlog.processors.JSONRenderer(sort_keys=True))
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()))
    return processors


def _configure_file_logging(settings: LoggingSettings) -> Path | None:
    if not settings.export_logs:
        return None
    path = Path(settings.dir)
    path.mkdir(parents=True, exist_ok=True)
    root = logging.getLogger()
    for handler in list(root.handlers):
        if handler.get_name() == _FILE_HANDLER_NAME:
            root.removeHandler(handler)
    handler = logging.FileHandler(path / settings.file, encoding="utf-8")
    handler.set_name(_FILE_HANDLER_NAME)
    handler.setFormatter(JsonLineFormatter())
    root.addHandler(handler)
    return path / settings.file


def initialize_logging(settings: LoggingSettings | None = None) -> None:
    """
    Initialize logging configuration.

    Called once by the CLI; library modules only call structlog.get_logger.
    """
    settings = settings or get_settings().logging
    _configure_standard_logging(settings)
    structlog.configure(
        processors=_get_processors(settings),
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )
    log_file = _configure_file_logging(settings)
    structlog.get_logger(__name__).debug(
        "Logging initialized",
        log_level=settings.level,
        log_format=settings.format,
        log_file=str(log_file) if log_file else None,
    )
