"""Minimal scatter/line plots as hand-written SVG; CSVs remain the data of record."""

import math
from collections import OrderedDict
from pathlib import Path
from typing import Any
from xml.sax.saxutils import escape

import structlog

from atvr.sinks.base import Sink

logger = structlog.get_logger(__name__)

WIDTH, HEIGHT = 520, 380
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 64, 140, 36, 48
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"]


def _fmt(v: float) -> str:
    return f"{v:.3g}"


class SVGSink(Sink):
    """
    Rows are {"series": name, "x": float, "y": float} with an optional
    "kind" of "scatter" (default) or "line" per series.
    """

    def __init__(self, path: str | Path, title: str = "", x_label: str = "x", y_label: str = "y"):
        super().__init__(path)
        self.title = title
        self.x_label = x_label
        self.y_label = y_label
        self.series: "OrderedDict[str, dict[str, Any]]" = OrderedDict()

    def emit(self, row: dict[str, Any]) -> None:
        name = str(row.get("series", ""))
        entry = self.series.setdefault(name, {"kind": row.get("kind", "scatter"), "points": []})
        x, y = float(row["x"]), float(row["y"])
        if math.isfinite(x) and math.isfinite(y):
            entry["points"].append((x, y))

    def render(self) -> str:
        points = [p for s in self.series.values() for p in s["points"]]
        xs = [p[0] for p in points] or [0.0, 1.0]
        ys = [p[1] for p in points] or [0.0, 1.0]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(0.0, min(ys)), max(ys)
        if x_hi == x_lo:
            x_hi = x_lo + 1.0
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
        plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

        def sx(x: float) -> float:
            return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

        def sy(y: float) -> float:
            return MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(self.title)}</text>',
            f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP + plot_h}" x2="{MARGIN_LEFT + plot_w}" '
            f'y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
            f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
        ]
        for i in range(5):
            tx = x_lo + (x_hi - x_lo) * i / 4
            ty = y_lo + (y_hi - y_lo) * i / 4
            out.append(
                f'<text x="{sx(tx):.1f}" y="{MARGIN_TOP + plot_h + 16}" text-anchor="middle">{_fmt(tx)}</text>'
            )
            out.append(f'<text x="{MARGIN_LEFT - 6}" y="{sy(ty) + 4:.1f}" text-anchor="end">{_fmt(ty)}</text>')
        out.append(
            f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">'
            f"{escape(self.x_label)}</text>"
        )
        out.append(
            f'<text x="14" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {MARGIN_TOP + plot_h / 2:.1f})">{escape(self.y_label)}</text>'
        )

        for index, (name, series) in enumerate(self.series.items()):
            color = PALETTE[index % len(PALETTE)]
            pts = series["points"]
            if series["kind"] == "line" and pts:
                coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in sorted(pts))
                out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            else:
                out.extend(
                    f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{color}" fill-opacity="0.7"/>'
                    for x, y in pts
                )
            ly = MARGIN_TOP + 14 * index + 6
            lx = WIDTH - MARGIN_RIGHT + 12
            out.append(f'<rect x="{lx}" y="{ly - 6}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{lx + 14}" y="{ly + 3}">{escape(name)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def flush(self) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(self.render(), encoding="utf-8")
        logger.info("Wrote SVG", path=str(self.path), series=len(self.series))
        return self.path
