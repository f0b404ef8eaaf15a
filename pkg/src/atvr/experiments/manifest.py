"""Run manifests and the output directory of one CLI run."""

from pathlib import Path
from typing import Any

import structlog
from pydantic import BaseModel, Field

from atvr.sinks.csv import CSVSink
from atvr.sinks.json import JSONSink, dumps
from atvr.sinks.svg import SVGSink

logger = structlog.get_logger(__name__)

MANIFEST_NAME = "manifest.json"


def library_version() -> str:
    from atvr import __version__

    return __version__


class ExperimentManifest(BaseModel):
    """
    What a run was and what it wrote. No timestamps or host details, so a
    rerun with the same config writes the same bytes.
    """

    kind: str
    seed: int
    config: dict[str, Any]
    outputs: list[str] = Field(default_factory=list)
    version: str = Field(default_factory=library_version)
    summary: dict[str, Any] = Field(default_factory=dict)


class RunContext:
    """Output directory for one run; every file written through it is listed in the manifest."""

    def __init__(self, kind: str, out_dir: str | Path, config: BaseModel, seed: int, threads: int = 1):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.threads = threads
        self.manifest = ExperimentManifest(
            kind=kind,
            seed=seed,
            config=config.model_dump(mode="json", by_alias=True),
        )

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _record(self, path: Path) -> Path:
        name = path.relative_to(self.out_dir).as_posix()
        if name not in self.manifest.outputs:
            self.manifest.outputs.append(name)
        return path

    def write_csv(self, name: str, columns: list[str], rows: list[dict[str, Any]]) -> Path:
        sink = CSVSink(self.path(name), columns)
        sink.emit_many(rows)
        return self._record(sink.flush())

    def write_json(self, name: str, document: dict[str, Any]) -> Path:
        sink = JSONSink(self.path(name), single=True)
        sink.emit(document)
        return self._record(sink.flush())

    def write_svg(self, sink: SVGSink) -> Path:
        return self._record(sink.flush())

    def svg(self, name: str, title: str, x_label: str, y_label: str) -> SVGSink:
        return SVGSink(self.path(name), title=title, x_label=x_label, y_label=y_label)

    def record_file(self, path: Path) -> Path:
        """List a file written by other means (checkpoints, datasets)."""
        return self._record(path)

    def finish(self, **summary: Any) -> Path:
        self.manifest.summary.update(summary)
        path = self.path(MANIFEST_NAME)
        path.write_text(dumps(self.manifest.model_dump(mode="json")), encoding="utf-8")
        logger.info("Run complete", kind=self.manifest.kind, out_dir=str(self.out_dir))
        return path
