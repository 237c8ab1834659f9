"""Static PPM/SVG pictures of sampled fields.

Images put x1 on the horizontal axis and x2 upward, so row 0 of the picture
is the top cell row j = n2 - 1. Output bytes depend only on the samples.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .geometry import IndicatorField, ScalarField

INSIDE = (31, 73, 125)
OUTSIDE = (245, 245, 240)

# viridis anchors, linearly interpolated
_RAMP = np.array([
    (68, 1, 84),
    (59, 82, 139),
    (33, 145, 140),
    (94, 201, 98),
    (253, 231, 37),
], dtype=np.float64)

SVG_MAX_CELLS = 128


def _image_rows(samples):
    """(n2, n1) array with the top image row = largest x2."""
    return np.ascontiguousarray(samples.T[::-1])


def colorize(field, style):
    if style == "indicator":
        mask = _image_rows(np.asarray(field.samples, dtype=bool))
        rgb = np.empty(mask.shape + (3,), dtype=np.uint8)
        rgb[mask] = INSIDE
        rgb[~mask] = OUTSIDE
        return rgb
    if style == "heatmap":
        vals = _image_rows(np.asarray(field.samples, dtype=np.float64))
        lo, hi = float(vals.min()), float(vals.max())
        t = np.zeros_like(vals) if hi <= lo else (vals - lo) / (hi - lo)
        pos = t * (len(_RAMP) - 1)
        k = np.minimum(pos.astype(int), len(_RAMP) - 2)
        f = (pos - k)[..., None]
        rgb = _RAMP[k] * (1 - f) + _RAMP[k + 1] * f
        return np.rint(rgb).astype(np.uint8)
    raise DomainError(f"unknown render style {style!r}; use 'indicator' or 'heatmap'")


def to_ppm(field, style) -> bytes:
    rgb = colorize(field, style)
    h, w, _ = rgb.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def _downsample(field, limit):
    n1, n2 = field.resolution
    f1 = -(-n1 // limit)
    f2 = -(-n2 // limit)
    if f1 == 1 and f2 == 1:
        return field
    s = np.asarray(field.samples)
    if isinstance(field, IndicatorField):
        return IndicatorField(s[::f1, ::f2])
    if n1 % f1 == 0 and n2 % f2 == 0:
        return ScalarField(s.reshape(n1 // f1, f1, n2 // f2, f2).mean(axis=(1, 3)))
    return ScalarField(s[::f1, ::f2])


def to_svg(field, style, max_cells=SVG_MAX_CELLS) -> str:
    """SVG with one rect per horizontal run of equal color (unit cells)."""
    small = _downsample(field, max_cells)
    rgb = colorize(small, style)
    h, w, _ = rgb.shape
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{4 * w}" height="{4 * h}" '
           f'viewBox="0 0 {w} {h}" shape-rendering="crispEdges">']
    for r in range(h):
        row = rgb[r]
        start = 0
        for c in range(1, w + 1):
            if c == w or not np.array_equal(row[c], row[start]):
                col = "#%02x%02x%02x" % tuple(int(v) for v in row[start])
                out.append(f'<rect x="{start}" y="{r}" width="{c - start}" height="1" fill="{col}"/>')
                start = c
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render(field, style, path, fmt=None):
    """Write ``field`` to ``path`` as PPM or SVG (format from the suffix by default)."""
    fmt = fmt or ("svg" if str(path).endswith(".svg") else "ppm")
    if fmt == "svg":
        data = to_svg(field, style).encode("ascii")
    elif fmt == "ppm":
        data = to_ppm(field, style)
    else:
        raise DomainError(f"unknown image format {fmt!r}")
    with open(path, "wb") as fh:
        fh.write(data)
    return path
