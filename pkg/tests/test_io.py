import math
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given
from hypothesis import strategies as st

from starshare import io
from starshare.experiments import SweepRecord

SVG = "{http://www.w3.org/2000/svg}"


def table():
    return io.OutputTable(
        ("j", "S", "ok", "note"),
        [(1, 2.0000000000039195, True, ""), (2, math.nan, False, 'has "quotes", commas')],
        {"command": "demo", "config": {"k": 2}},
    )


def test_rectangular():
    with pytest.raises(ValueError):
        io.OutputTable(("a", "b"), [(1,)])


def test_metadata_always_present():
    t = io.OutputTable(("a",), [])
    assert t.metadata["tool"] == "starshare" and "version" in t.metadata


def test_empty_table_csv():
    text = io.to_csv(io.OutputTable(("a", "b"), []))
    lines = text.splitlines()
    assert lines[0].startswith("# {") and lines[1] == "a,b" and len(lines) == 2


def test_csv_round_trip():
    back = io.from_csv(io.to_csv(table()))
    assert back.columns == table().columns
    assert back.rows[0][:3] == (1, 2.0000000000039195, True)
    assert math.isnan(back.rows[1][1])
    assert back.rows[1][3] == 'has "quotes", commas'
    assert back.metadata == table().metadata


def test_json_round_trip():
    t = io.OutputTable(("j", "S"), [(1, 0.1), (2, 1e-300)], {"x": [1, 2]})
    assert io.from_json(io.to_json(t)) == t


@given(st.floats(allow_nan=False, allow_infinity=True))
def test_float_cells_round_trip(x):
    assert io.parse_cell(io.format_cell(x)) == x


def test_deterministic_files(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    io.emit_table(table(), "csv", a)
    io.emit_table(table(), "csv", b)
    assert a.read_bytes() == b.read_bytes()
    assert io.read_table(a).columns == table().columns


def grid(values, nx, ny):
    it = iter(values)
    return [SweepRecord((float(x), float(y)), next(it), (), ()) for x in range(nx) for y in range(ny)]


def parse_svg(text):
    root = ET.fromstring(text.encode())
    assert root.tag == SVG + "svg" and root.get("version") == "1.1"
    cells = [r for r in root.iter(SVG + "rect") if r.get("class") == "cell"]
    legend = [r for r in root.iter(SVG + "rect") if r.get("class") == "legend"]
    labels = [t.text for t in root.iter(SVG + "text") if t.get("class") == "legend-label"]
    return cells, legend, labels


def test_heatmap_two_by_two(tmp_path):
    path = tmp_path / "h.svg"
    io.render_heatmap(grid([0, 1, 2, 3], 2, 2), path, ("theta", "delta"))
    cells, legend, labels = parse_svg(path.read_text())
    assert len(cells) == 4 and len(legend) == 4
    assert labels == ["0", "1", "2", "3"]


def test_heatmap_all_zero():
    cells, legend, labels = parse_svg(io.render_heatmap(grid([0] * 6, 3, 2)))
    assert len({c.get("fill") for c in cells}) == 1
    assert labels == ["0"]


def test_heatmap_rejects_ragged():
    recs = grid([1, 1, 1, 1], 2, 2)[:3]
    with pytest.raises(io.StructureError):
        io.render_heatmap(recs)
