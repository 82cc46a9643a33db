"""Table serialization (CSV / JSON) and discrete SVG heatmaps.

CSV files carry their metadata on a single leading ``# {json}`` line, then
a header row and RFC-4180 quoted rows.  Floats are written with 17
significant digits so that reading a file back reproduces every value
exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence
from xml.sax.saxutils import escape

from . import __version__

_INT = re.compile(r"^[-+]?\d+$")


@dataclass(frozen=True)
class OutputTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        width = len(self.columns)
        for r in self.rows:
            if len(r) != width:
                raise ValueError(f"row has {len(r)} cells, expected {width}")
        meta = dict(self.metadata)
        meta.setdefault("tool", "starshare")
        meta.setdefault("version", __version__)
        object.__setattr__(self, "metadata", meta)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def parse_cell(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    if text == "":
        return None
    if _INT.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def to_csv(table: OutputTable) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(table.metadata, sort_keys=True) + "\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def from_csv(text: str) -> OutputTable:
    lines = text.splitlines(keepends=True)
    if not lines or not lines[0].startswith("# "):
        raise ValueError("missing metadata line")
    metadata = json.loads(lines[0][2:])
    reader = csv.reader(io.StringIO("".join(lines[1:])))
    columns = next(reader)
    rows = [tuple(parse_cell(c) for c in r) for r in reader]
    return OutputTable(tuple(columns), tuple(rows), metadata)


def to_json(table: OutputTable) -> str:
    doc = {
        "metadata": table.metadata,
        "columns": list(table.columns),
        "data": {name: [r[i] for r in table.rows] for i, name in enumerate(table.columns)},
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def from_json(text: str) -> OutputTable:
    doc = json.loads(text)
    columns = doc["columns"]
    data = doc["data"]
    rows = list(zip(*(data[c] for c in columns))) if columns else []
    return OutputTable(tuple(columns), tuple(rows), doc["metadata"])


def render_table(table: OutputTable, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ValueError(f"tables cannot be written as {fmt!r}")


def emit_table(table: OutputTable, fmt: str, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(render_table(table, fmt), encoding="utf-8", newline="")
    return path


def read_table(path: str | Path) -> OutputTable:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        return from_json(text)
    return from_csv(text)


# ---------------------------------------------------------------------------
# heatmap

# one colour per round count; counts past the palette reuse the last colour
PALETTE = (
    "#f7f7f7", "#fde725", "#90d743", "#35b779", "#21918c",
    "#31688e", "#443983", "#440154", "#2a0036", "#14001c",
)


class StructureError(ValueError):
    pass


def _grid_shape(records) -> tuple[list[float], list[float]]:
    if not records:
        raise StructureError("no cells to draw")
    dims = {len(r.coords) for r in records}
    if dims not in ({1}, {2}):
        raise StructureError("cells must all have one or two coordinates")
    xs = sorted({r.coords[0] for r in records})
    ys = sorted({r.coords[1] for r in records}) if dims == {2} else [0.0]
    seen = {tuple(r.coords) if len(r.coords) == 2 else (r.coords[0], 0.0) for r in records}
    if len(seen) != len(records) or len(seen) != len(xs) * len(ys):
        raise StructureError("cells do not form a rectangular grid")
    return xs, ys


def render_heatmap(records: Sequence, path: str | Path | None = None,
                   axis_labels: Sequence[str] = ("axis1", "axis2"),
                   title: str = "maximum sharing rounds", cell: int = 4) -> str:
    """Discrete colour grid of ``max_rounds`` with an integer legend.

    axis1 runs left to right, axis2 bottom to top.
    """
    xs, ys = _grid_shape(records)
    col = {v: i for i, v in enumerate(xs)}
    row = {v: i for i, v in enumerate(ys)}
    margin_left, margin_top, legend_w = 60, 30, 90
    width = margin_left + cell * len(xs) + legend_w
    height = margin_top + cell * len(ys) + 50

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<title>{escape(title)}</title>',
        '<g id="cells" shape-rendering="crispEdges">',
    ]
    for r in records:
        x = margin_left + cell * col[r.coords[0]]
        yv = r.coords[1] if len(r.coords) == 2 else 0.0
        y = margin_top + cell * (len(ys) - 1 - row[yv])
        colour = PALETTE[min(r.max_rounds, len(PALETTE) - 1)]
        out.append(f'<rect class="cell" x="{x}" y="{y}" width="{cell}" height="{cell}" '
                   f'fill="{colour}" data-rounds="{r.max_rounds}"/>')
    out.append("</g>")

    grid_bottom = margin_top + cell * len(ys)
    label_x, label_y = (list(axis_labels) + ["", ""])[:2]
    out.append(f'<text x="{margin_left}" y="{grid_bottom + 15}" font-size="10">'
               f'{escape(label_x)}: {xs[0]:.4g} .. {xs[-1]:.4g}</text>')
    if len(ys) > 1:
        out.append(f'<text x="5" y="{margin_top - 10}" font-size="10">'
                   f'{escape(label_y)}: {ys[0]:.4g} .. {ys[-1]:.4g} (upwards)</text>')
    out.append(f'<text x="{margin_left}" y="{grid_bottom + 32}" font-size="10">{escape(title)}</text>')

    out.append('<g id="legend">')
    lx = margin_left + cell * len(xs) + 15
    for i, value in enumerate(sorted({r.max_rounds for r in records})):
        ly = margin_top + 16 * i
        colour = PALETTE[min(value, len(PALETTE) - 1)]
        out.append(f'<rect class="legend" x="{lx}" y="{ly}" width="12" height="12" '
                   f'fill="{colour}" stroke="#000000" stroke-width="0.5"/>')
        out.append(f'<text class="legend-label" x="{lx + 18}" y="{ly + 10}" font-size="10">{value}</text>')
    out.append("</g>")
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
