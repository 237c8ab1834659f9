"""Periodic geometry on the unit torus: points, balls, sampled fields, quadrature.

Grid convention: sample ``[i, j]`` of an ``(n1, n2)`` field sits at the cell
center ``((i + 0.5) / n1, (j + 0.5) / n2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DomainError, PrecisionError

MAX_RADIUS = 0.25
MIN_BALL_CELLS = 50


def wrap_array(x):
    """Reduce an array mod 1 into [0, 1)."""
    r = np.asarray(x, dtype=np.float64)
    r = r - np.floor(r)
    return np.where(r >= 1.0, 0.0, r)


def _wrap1(v):
    r = v - math.floor(v)
    return 0.0 if r >= 1.0 else r


@dataclass(frozen=True)
class TorusPoint:
    x1: float
    x2: float

    def __post_init__(self):
        for v in (self.x1, self.x2):
            if not (math.isfinite(v) and 0.0 <= v < 1.0):
                raise DomainError(f"torus coordinates must lie in [0, 1), got ({self.x1}, {self.x2})")

    def __iter__(self):
        yield self.x1
        yield self.x2


def wrap(raw) -> TorusPoint:
    """Canonical representative of ``raw`` in [0, 1)^2."""
    a, b = (float(v) for v in raw)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"cannot wrap non-finite point ({a}, {b})")
    return TorusPoint(_wrap1(a), _wrap1(b))


def periodic_delta(d):
    """Signed displacement reduced to its nearest periodic copy, in [-1/2, 1/2]."""
    d = np.asarray(d, dtype=np.float64)
    return d - np.round(d)


def torus_dist_array(a1, a2, b1, b2):
    dx = np.abs(np.asarray(a1, dtype=np.float64) - b1)
    dy = np.abs(np.asarray(a2, dtype=np.float64) - b2)
    dx = np.minimum(dx, 1.0 - dx)
    dy = np.minimum(dy, 1.0 - dy)
    return np.sqrt(dx * dx + dy * dy)


def torus_dist(p: TorusPoint, q: TorusPoint) -> float:
    """Euclidean distance minimized over integer translates."""
    return float(torus_dist_array(p.x1, p.x2, q.x1, q.x2))


@dataclass(frozen=True)
class Ball:
    center: TorusPoint
    radius: float

    def __post_init__(self):
        if not (0.0 < self.radius <= MAX_RADIUS):
            raise DomainError(f"ball radius must lie in (0, 1/4], got {self.radius}")

    @property
    def area(self):
        return math.pi * self.radius ** 2


def cell_centers(n1, n2):
    """Coordinate arrays (shape ``(n1, n2)``) of all cell centers."""
    c1 = (np.arange(n1) + 0.5) / n1
    c2 = (np.arange(n2) + 0.5) / n2
    return np.meshgrid(c1, c2, indexing="ij")


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class IndicatorField:
    """Boolean samples of a subset of the torus at cell centers."""

    def __init__(self, samples):
        samples = np.asarray(samples)
        if samples.ndim != 2 or 0 in samples.shape:
            raise DomainError("indicator samples must be a non-empty 2-D array")
        self.samples = _frozen(samples.astype(bool))

    @property
    def resolution(self):
        return self.samples.shape

    @property
    def cell_area(self):
        n1, n2 = self.resolution
        return 1.0 / (n1 * n2)

    def fraction(self):
        return int(np.count_nonzero(self.samples)) / self.samples.size

    def complement(self):
        return IndicatorField(~self.samples)

    def __eq__(self, other):
        return isinstance(other, IndicatorField) and np.array_equal(self.samples, other.samples)

    def __repr__(self):
        n1, n2 = self.resolution
        return f"IndicatorField({n1}x{n2}, fraction={self.fraction():.6f})"


class ScalarField:
    """Real samples at cell centers; non-finite values are rejected."""

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 2 or 0 in samples.shape:
            raise DomainError("scalar samples must be a non-empty 2-D array")
        if not np.all(np.isfinite(samples)):
            raise DomainError("scalar field contains non-finite samples")
        self.samples = _frozen(samples)

    @property
    def resolution(self):
        return self.samples.shape

    def __repr__(self):
        n1, n2 = self.resolution
        return f"ScalarField({n1}x{n2})"


def required_resolution(eps):
    """Smallest square grid putting about MIN_BALL_CELLS cell centers in an eps-ball."""
    return int(math.ceil(math.sqrt(MIN_BALL_CELLS / (math.pi * eps * eps))))


def check_ball_resolution(resolution, eps):
    n1, n2 = resolution
    if math.pi * eps * eps * n1 * n2 < MIN_BALL_CELLS:
        raise PrecisionError(
            f"grid {n1}x{n2} too coarse for eps={eps}: need at least "
            f"{required_resolution(eps)}^2 cells for {MIN_BALL_CELLS} samples per ball")


def ball_fractions(field: IndicatorField, c1, c2, eps, backend=None):
    """Fraction of cells inside each eps-ball (centers ``c1, c2``) that lie in the set.

    Returns ``(fractions, inside_counts)``.
    """
    if not (0.0 < eps <= MAX_RADIUS):
        raise DomainError(f"ball radius must lie in (0, 1/4], got {eps}")
    check_ball_resolution(field.resolution, eps)
    inside, hits = kernels.ball_counts(field.samples.view(np.uint8), c1, c2, eps, backend=backend)
    return hits / inside, inside


def ball_fraction(field: IndicatorField, ball: Ball) -> float:
    """Area(ball ∩ set) / Area(ball), by equal-weight cell-center counting."""
    frac, _ = ball_fractions(field, [ball.center.x1], [ball.center.x2], ball.radius)
    return float(frac[0])


def ball_cell_count(resolution, ball: Ball) -> int:
    n1, n2 = resolution
    inside, _ = kernels.ball_counts(np.zeros((n1, n2), dtype=np.uint8),
                                    [ball.center.x1], [ball.center.x2], ball.radius)
    return int(inside[0])


def integrate(field: ScalarField) -> float:
    """Midpoint rule over the torus with exactly rounded, order-independent summation."""
    samples = field.samples
    if not np.all(np.isfinite(samples)):
        raise DomainError("cannot integrate a field with non-finite samples")
    return math.fsum(samples.ravel().tolist()) / samples.size


def write_field_csv(field, path):
    """Write ``n1,n2`` on the first line, then one row of samples (fixed i) per line."""
    samples = field.samples
    n1, n2 = samples.shape
    lines = [f"{n1},{n2}"]
    if samples.dtype == bool:
        for row in samples.astype(np.uint8):
            lines.append(",".join("1" if v else "0" for v in row))
    else:
        for row in samples:
            lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_field_csv(path, indicator=False):
    text = Path(path).read_text().split()
    try:
        n1, n2 = (int(v) for v in text[0].split(","))
        rows = [[float(v) for v in line.split(",")] for line in text[1:]]
        data = np.array(rows, dtype=np.float64)
    except (ValueError, IndexError) as exc:
        raise DomainError(f"malformed field CSV {path}: {exc}") from exc
    if data.shape != (n1, n2):
        raise DomainError(f"field CSV {path}: header says {n1}x{n2}, body has shape {data.shape}")
    if indicator:
        return IndicatorField(data != 0.0)
    return ScalarField(data)
