import json
import math

import numpy as np

from bridgewobble import output


def test_fmt_round_trips_doubles():
    for x in (0.1, 1 / 3, 3.438536169193765, -1e-300, 2.0**52 + 1):
        assert float(output.fmt(x)) == x
    assert output.fmt(np.float64(0.5)) == "0.5"
    assert output.fmt(np.int64(3)) == "3"
    assert output.fmt(True) == "true" and output.fmt(np.bool_(False)) == "false"
    assert output.fmt(None) == ""


def test_write_csv(tmp_path):
    p = output.write_csv(tmp_path / "sub/x.csv", ["a", "b"], [(1, 0.1), (2, "D1")])
    assert p.read_text() == "a,b\n1,0.10000000000000001\n2,D1\n"


def test_json_handles_numpy_and_complex(tmp_path):
    data = {"a": np.array([1.0, 2.0]), "b": np.bool_(True), "c": 1 + 2j, "d": math.inf, "e": (np.int32(4),)}
    loaded = json.loads(output.write_json(tmp_path / "x.json", data).read_text())
    assert loaded == {"a": [1.0, 2.0], "b": True, "c": {"re": 1.0, "im": 2.0}, "d": "inf", "e": [4]}


def test_svg_lines_splits_on_nan_and_clips():
    svg = output.svg_lines([("s", [0, 1, 2, 3], [0, math.nan, 1, 5])], "t", "x", "y", markers=[(1, 1)], ylim=(0, 2))
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 2
    assert svg.count("<circle") == 1


def test_svg_region_map_legend():
    svg = output.svg_region_map([0, 1], [0, 1], [["D1", "D2"], ["D2", "D3"]], "m", "a", "b", curves=[("c", [0, 1], [0, 1])])
    for lab in ("D1", "D2", "D3"):
        assert f">{lab}<" in svg
    assert output.REGION_COLORS["D3"] in svg
