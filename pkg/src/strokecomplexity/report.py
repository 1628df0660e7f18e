"""Serialization of results and SVG rendering of annotated glyphs.

All writers produce UTF-8 with LF line endings, and identical inputs give
identical bytes. Infinite stability values are written as ``inf``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

from .metrics import MetricsRow, ScriptSummary
from .model import Glyph, ShapePoint, ShapePointKind

MEASURES = ("strokes_per_unicode", "curvelength_per_unicode", "stability", "c1", "c2", "c3")


def format_value(v) -> str:
    """Shortest round-trip text of a number; infinity becomes ``inf``."""
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and math.isinf(v):
        return format_value(v)
    return v


@dataclass(frozen=True)
class ComparisonTable:
    measure: str
    rows: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        rows = tuple(sorted(((str(s), float(v)) for s, v in self.rows), key=lambda r: (r[1], r[0])))
        scripts = [s for s, _ in rows]
        if len(set(scripts)) != len(scripts):
            raise ValueError(f"{self.measure}: a script appears twice")
        if any(math.isnan(v) for _, v in rows):
            raise ValueError(f"{self.measure}: NaN value")
        object.__setattr__(self, "rows", rows)

    @property
    def lowest(self) -> str:
        return self.rows[0][0]


def comparison_tables(summaries: Sequence[ScriptSummary]) -> list[ComparisonTable]:
    """The six per-script tables, each sorted ascending by value."""
    return [ComparisonTable(m, tuple((s.script, s.value(m)) for s in summaries)) for m in MEASURES]


def emit_summary(tables: Sequence[ComparisonTable], format: str = "csv") -> bytes:
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["measure", "script", "value"])
        for t in tables:
            for script, value in t.rows:
                w.writerow([t.measure, script, format_value(value)])
        return buf.getvalue().encode("utf-8")
    if format == "json":
        doc = {
            "tables": [
                {"measure": t.measure, "rows": [{"script": s, "value": _json_value(v)} for s, v in t.rows]}
                for t in tables
            ]
        }
        return (json.dumps(doc, ensure_ascii=False, indent=1) + "\n").encode("utf-8")
    raise ValueError(f"unknown summary format {format!r}")


def emit_rows(rows: Iterable[MetricsRow], format: str = "csv") -> bytes:
    """Per-word (or per-script) metrics, one row each, in the given order."""
    records = [r.as_record() for r in rows]
    if format == "json":
        doc = [{k: _json_value(v) for k, v in rec.items()} for rec in records]
        return (json.dumps(doc, ensure_ascii=False, indent=1) + "\n").encode("utf-8")
    if format != "csv":
        raise ValueError(f"unknown rows format {format!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if records:
        w.writerow(list(records[0]))
        for rec in records:
            w.writerow([format_value(v) for v in rec.values()])
    return buf.getvalue().encode("utf-8")


def emit_survival(rows) -> bytes:
    """Perturbation study as ``shape,kind,magnitude,survival_rate``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["shape", "kind", "magnitude", "survival_rate"])
    for r in rows:
        w.writerow([r.shape, r.kind.value, format_value(float(r.magnitude)), format_value(float(r.survival_rate))])
    return buf.getvalue().encode("utf-8")


def emit_violations(problems: Sequence[str]) -> bytes:
    return "".join(p + "\n" for p in problems).encode("utf-8")


# --------------------------------------------------------------------------
# SVG
# --------------------------------------------------------------------------

_COLORS = {
    "E": "#1f77b4",
    "B": "#2ca02c",
    "X": "#9467bd",
    "C": "#d62728",
    "T": "#ff7f0e",
    "D": "#000000",
    "A": "#8c564b",
}


def _n(v: float) -> str:
    text = f"{v:.4f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def _marker(kind: ShapePointKind, x: float, y: float, r: float) -> str:
    c = _COLORS[kind.value]
    stroke = f'fill="none" stroke="{c}" stroke-width="{_n(r / 3)}"'
    if kind is ShapePointKind.E:
        return f'<circle cx="{_n(x)}" cy="{_n(y)}" r="{_n(r)}" {stroke}/>'
    if kind is ShapePointKind.B:
        return f'<rect x="{_n(x - r)}" y="{_n(y - r)}" width="{_n(2 * r)}" height="{_n(2 * r)}" {stroke}/>'
    if kind is ShapePointKind.X:
        d = f"M{_n(x - r)} {_n(y - r)}L{_n(x + r)} {_n(y + r)}M{_n(x - r)} {_n(y + r)}L{_n(x + r)} {_n(y - r)}"
        return f'<path d="{d}" {stroke}/>'
    if kind is ShapePointKind.C:
        pts = f"{_n(x)},{_n(y - r)} {_n(x + r)},{_n(y + r)} {_n(x - r)},{_n(y + r)}"
        return f'<polygon points="{pts}" {stroke}/>'
    if kind is ShapePointKind.T:
        d = f"M{_n(x - r)} {_n(y - r)}L{_n(x + r)} {_n(y - r)}M{_n(x)} {_n(y - r)}L{_n(x)} {_n(y + r)}"
        return f'<path d="{d}" {stroke}/>'
    if kind is ShapePointKind.D:
        return f'<circle cx="{_n(x)}" cy="{_n(y)}" r="{_n(r)}" fill="{c}"/>'
    if kind is ShapePointKind.A:
        pts = f"{_n(x)},{_n(y - r)} {_n(x + r)},{_n(y)} {_n(x)},{_n(y + r)} {_n(x - r)},{_n(y)}"
        return f'<polygon points="{pts}" {stroke}/>'
    raise ValueError(f"no marker for {kind}")


def render_annotated_glyph(glyph: Glyph, points: Sequence[ShapePoint], title: str = "") -> bytes:
    """SVG of the glyph's strokes with one labelled marker per shape point.

    The view box is the bounding box padded by 10% of each side's extent.
    Pen coordinates grow upward, so y is negated for the SVG frame.
    """
    xmin, ymin, xmax, ymax = glyph.bbox()
    w, h = xmax - xmin, ymax - ymin
    size = max(w, h) or 1.0
    px, py = (0.1 * w or 0.1 * size), (0.1 * h or 0.1 * size)
    vb = (xmin - px, -(ymax + py), w + 2 * px, h + 2 * py)
    r = 0.02 * size

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{" ".join(_n(v) for v in vb)}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    for s in sorted(glyph.strokes, key=lambda s: s.id):
        coords = " ".join(f"{_n(x)},{_n(-y)}" for x, y in s.points)
        out.append(
            f'<polyline class="stroke" id="stroke-{s.id}" points="{coords}" '
            f'fill="none" stroke="#444444" stroke-width="{_n(r / 2)}"/>'
        )
    for p in sorted(points, key=lambda p: p.sort_key):
        x, y = p.position[0], -p.position[1]
        k = p.kind.value
        out.append(f'<g class="sp sp-{k}">')
        out.append(_marker(p.kind, x, y, r))
        out.append(
            f'<text x="{_n(x + 1.5 * r)}" y="{_n(y - 1.5 * r)}" font-size="{_n(3 * r)}" '
            f'fill="{_COLORS[k]}">{k}</text>'
        )
        out.append("</g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


_UNSAFE = re.compile(r'[\x00-\x1f\\/<>:"|?*\s]+')


def safe_name(text: str) -> str:
    """A path component for ``text``; path separators and dot-names are replaced."""
    name = _UNSAFE.sub("_", text).strip(".") or "_"
    return name


def annotation_path(root: Path, script: str, word: str, glyph_index: int) -> Path:
    return Path(root) / safe_name(script) / safe_name(word) / f"{glyph_index}.svg"
