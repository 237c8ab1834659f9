import xml.etree.ElementTree as ET

import numpy as np
import pytest

from torusmix.errors import DomainError
from torusmix.geometry import IndicatorField, ScalarField
from torusmix.render import INSIDE, OUTSIDE, colorize, render, to_ppm, to_svg


def _ppm_pixels(data):
    header, rest = data.split(b"\n255\n", 1)
    w, h = map(int, header.split(b"\n")[1].split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w, 3)


def test_ppm_layout():
    s = np.zeros((4, 3), dtype=bool)
    s[1, 2] = True  # x1 cell 1, top x2 cell
    data = to_ppm(IndicatorField(s), "indicator")
    assert data.startswith(b"P6\n4 3\n255\n")
    px = _ppm_pixels(data)
    assert tuple(px[0, 1]) == INSIDE
    assert tuple(px[2, 1]) == OUTSIDE and tuple(px[0, 0]) == OUTSIDE


def test_heatmap_range():
    vals = np.linspace(0, 1, 16).reshape(4, 4)
    rgb = colorize(ScalarField(vals), "heatmap")
    assert tuple(rgb[-1, 0]) == (68, 1, 84)
    assert tuple(rgb[0, -1]) == (253, 231, 37)
    flat = colorize(ScalarField(np.full((3, 3), 7.0)), "heatmap")
    assert len({tuple(p) for p in flat.reshape(-1, 3)}) == 1


def test_svg_is_wellformed():
    s = np.random.default_rng(0).random((300, 200)) < 0.5
    root = ET.fromstring(to_svg(IndicatorField(s), "indicator"))
    assert root.tag.endswith("svg")
    rects = list(root)
    assert rects and all(r.tag.endswith("rect") for r in rects)


def test_render_files(tmp_path):
    f = ScalarField(np.arange(12.0).reshape(3, 4))
    render(f, "heatmap", tmp_path / "a.svg")
    render(f, "heatmap", tmp_path / "a.ppm")
    assert (tmp_path / "a.svg").read_text().startswith("<svg")
    assert (tmp_path / "a.ppm").read_bytes() == to_ppm(f, "heatmap")
    with pytest.raises(DomainError):
        colorize(f, "contour")
