"""Tests for sinks and run manifests."""

import json

import numpy as np
import pandas as pd
import pytest

from atvr.core.errors import InvalidInputError
from atvr.experiments.configs import GenDataConfig
from atvr.experiments.manifest import MANIFEST_NAME, RunContext
from atvr.sinks.csv import CSVSink
from atvr.sinks.json import JSONSink, dumps
from atvr.sinks.svg import SVGSink

pytestmark = pytest.mark.unit


class TestCSVSink:
    """Tests for CSV sink."""

    def test_fixed_column_order(self, tmp_path):
        """Test that the header follows the declared columns, not the row keys."""
        sink = CSVSink(tmp_path / "out" / "rows.csv", ["b", "a"])
        sink.emit({"a": 1, "b": 2.5, "extra": "ignored"})
        sink.emit({"b": 3.0, "a": 4})
        path = sink.flush()

        lines = path.read_text().splitlines()
        assert lines[0] == "b,a"
        assert lines[1] == "2.5,1"
        assert pd.read_csv(path).shape == (2, 2)

    def test_missing_column(self, tmp_path):
        """Test that rows lacking a column are rejected."""
        sink = CSVSink(tmp_path / "rows.csv", ["a", "b"])
        with pytest.raises(InvalidInputError):
            sink.emit({"a": 1})

    def test_empty_sink_writes_header(self, tmp_path):
        """Test flushing with no rows."""
        path = CSVSink(tmp_path / "rows.csv", ["x", "y"]).flush()
        assert path.read_text() == "x,y\n"


class TestJSONSink:
    """Tests for JSON sink."""

    def test_list_document(self, tmp_path):
        """Test that records are written as a list."""
        sink = JSONSink(tmp_path / "records.json")
        sink.emit_many([{"a": 1}, {"a": 2}])
        assert json.loads(sink.flush().read_text()) == [{"a": 1}, {"a": 2}]

    def test_single_document(self, tmp_path):
        """Test that single mode writes the last record itself."""
        sink = JSONSink(tmp_path / "report.json", single=True)
        sink.emit({"passed": True})
        assert json.loads(sink.flush().read_text()) == {"passed": True}

    def test_dumps_is_stable(self):
        """Test sorted keys and numpy values."""
        text = dumps({"b": np.float64(0.5), "a": np.arange(2)})
        assert text == '{\n  "a": [\n    0,\n    1\n  ],\n  "b": 0.5\n}\n'


class TestSVGSink:
    """Tests for SVG plots."""

    def test_render_series(self, tmp_path):
        """Test scatter and line series with a legend."""
        sink = SVGSink(tmp_path / "plot.svg", title="gap <lam>", x_label="eps", y_label="gap")
        sink.emit_many({"series": "lam=0", "x": x, "y": x * 2, "kind": "line"} for x in (0.01, 0.02))
        sink.emit({"series": "points", "x": 1.0, "y": float("nan")})
        sink.emit({"series": "points", "x": 1.0, "y": 1.0})
        text = sink.flush().read_text()

        assert text.startswith("<svg")
        assert "<polyline" in text
        assert text.count("<circle") == 1
        assert "gap &lt;lam&gt;" in text
        assert "lam=0" in text

    def test_empty_plot(self, tmp_path):
        """Test that a plot without points still renders."""
        assert "</svg>" in SVGSink(tmp_path / "empty.svg").render()


class TestRunContext:
    """Tests for run output directories."""

    def test_manifest_lists_outputs(self, tmp_path):
        """Test that every written file appears once in the manifest."""
        cfg = GenDataConfig(seed=3)
        ctx = RunContext("gen-data", tmp_path / "run", cfg, seed=3)
        ctx.write_csv("a.csv", ["x"], [{"x": 1}])
        ctx.write_csv("a.csv", ["x"], [{"x": 2}])
        ctx.write_json("b.json", {"k": 1})
        sink = ctx.svg("c.svg", "t", "x", "y")
        sink.emit({"x": 0, "y": 0})
        ctx.write_svg(sink)
        path = ctx.finish(rows=1)

        assert path.name == MANIFEST_NAME
        manifest = json.loads(path.read_text())
        assert manifest["outputs"] == ["a.csv", "b.json", "c.svg"]
        assert manifest["kind"] == "gen-data"
        assert manifest["seed"] == 3
        assert manifest["config"]["seed"] == 3
        assert manifest["summary"] == {"rows": 1}
        assert "version" in manifest

    def test_manifest_is_reproducible(self, tmp_path):
        """Test that two identical runs write identical manifests."""
        texts = []
        for name in ("one", "two"):
            ctx = RunContext("gen-data", tmp_path / name, GenDataConfig(), seed=0)
            ctx.write_json("b.json", {"k": 1})
            texts.append(ctx.finish().read_text())
        assert texts[0] == texts[1]
