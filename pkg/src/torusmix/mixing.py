"""The mixing-up-to-scale predicate and mixing-scale scans.

A set S mixes at scale eps with constant kappa when every eps-ball B holds
kappa <= |B ∩ S| / |B| <= 1 - kappa. The quantifier over all centers is
relaxed to a square lattice of pitch <= ``center_spacing``; the ball fraction
moves by at most about 2 d / (pi eps) when the center moves by d, which
bounds what the lattice can miss.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import IndicatorField, ball_fractions, cell_centers

DEFAULT_RATIO = 2.0 ** -0.25


@dataclass(frozen=True)
class MixingParams:
    kappa: float
    epsilon: float
    center_spacing: float | None = None
    grid_res: int = 1024

    def __post_init__(self):
        if not (0.0 < self.kappa < 0.5):
            raise DomainError(f"kappa must lie in (0, 1/2), got {self.kappa}")
        if not (0.0 < self.epsilon <= 0.25):
            raise DomainError(f"epsilon must lie in (0, 1/4], got {self.epsilon}")
        if self.center_spacing is None:
            object.__setattr__(self, "center_spacing", self.epsilon / 4)
        if not (0.0 < self.center_spacing <= self.epsilon / 2):
            raise DomainError(
                f"center_spacing must lie in (0, eps/2], got {self.center_spacing}")

    @property
    def tol(self):
        return 10.0 / self.grid_res


@dataclass(frozen=True)
class MixingVerdict:
    passed: bool
    worst_low: tuple  # ((x1, x2), fraction)
    worst_high: tuple
    centers_tested: int
    kappa: float
    epsilon: float
    tol: float

    @property
    def low_margin(self):
        """Slack of the lower inequality (negative when it fails)."""
        return self.worst_low[1] - self.kappa

    @property
    def high_margin(self):
        return (1.0 - self.kappa) - self.worst_high[1]

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "kappa": self.kappa,
            "passed": self.passed,
            "worst_low": {"x1": self.worst_low[0][0], "x2": self.worst_low[0][1],
                          "fraction": self.worst_low[1]},
            "worst_high": {"x1": self.worst_high[0][0], "x2": self.worst_high[0][1],
                           "fraction": self.worst_high[1]},
            "low_margin": self.low_margin,
            "high_margin": self.high_margin,
            "centers_tested": self.centers_tested,
            "tol": self.tol,
        }


def build_image_indicator(membership, grid_res) -> IndicatorField:
    """Evaluate a vectorized membership test ``membership(x1, x2)`` at every cell center."""
    if grid_res < 64:
        raise DomainError(f"grid_res must be >= 64, got {grid_res}")
    c1, c2 = cell_centers(grid_res, grid_res)
    inside = np.asarray(membership(c1.ravel(), c2.ravel()), dtype=bool)
    return IndicatorField(inside.reshape(grid_res, grid_res))


def reference_indicator(grid_res) -> IndicatorField:
    return build_image_indicator(lambda x1, x2: x2 < 0.5, grid_res)


def center_lattice(spacing):
    """Square lattice of centers, lexicographic in (x1, x2), pitch 1/m <= spacing."""
    m = int(math.ceil(1.0 / spacing - 1e-12))
    g = np.arange(m) / m
    c1, c2 = np.meshgrid(g, g, indexing="ij")
    return c1.ravel(), c2.ravel()


def mixes_at_scale(field: IndicatorField, params: MixingParams, backend=None) -> MixingVerdict:
    c1, c2 = center_lattice(params.center_spacing)
    frac, _ = ball_fractions(field, c1, c2, params.epsilon, backend=backend)
    lo = int(np.argmin(frac))
    hi = int(np.argmax(frac))
    tol = 10.0 / field.resolution[0]
    worst_low = ((float(c1[lo]), float(c2[lo])), float(frac[lo]))
    worst_high = ((float(c1[hi]), float(c2[hi])), float(frac[hi]))
    passed = worst_low[1] >= params.kappa - tol and worst_high[1] <= 1.0 - params.kappa + tol
    return MixingVerdict(bool(passed), worst_low, worst_high, int(c1.size),
                         params.kappa, params.epsilon, tol)


def geometric_eps_grid(eps_max=0.25, eps_min=0.01, ratio=DEFAULT_RATIO):
    """Descending geometric sequence eps_max, eps_max*ratio, ... down to eps_min."""
    if not (0.0 < ratio < 1.0):
        raise DomainError(f"eps ratio must lie in (0, 1), got {ratio}")
    if not (0.0 < eps_min <= eps_max <= 0.25):
        raise DomainError(f"need 0 < eps_min <= eps_max <= 1/4, got {eps_min}, {eps_max}")
    out = []
    e = eps_max
    while e >= eps_min * (1 - 1e-12):
        out.append(e)
        e *= ratio
    return out


@dataclass(frozen=True)
class ScanResult:
    kappa: float
    rows: tuple  # (eps, MixingVerdict), descending eps
    certified: float | None

    def as_dict(self):
        return {"kappa": self.kappa, "certified_eps": self.certified,
                "table": [v.as_dict() for _, v in self.rows]}


def mixing_scale_scan(field: IndicatorField, kappa, eps_grid, grid_res=None,
                      center_fraction=0.25, backend=None) -> ScanResult:
    """Evaluate the predicate at every eps in ``eps_grid`` independently.

    The certified scale is the smallest eps that passes while every larger
    tested eps passes too; None if the largest eps already fails.
    """
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid:
        raise DomainError("empty eps grid")
    if eps_grid != sorted(eps_grid) and eps_grid != sorted(eps_grid, reverse=True):
        raise DomainError("eps grid must be sorted")
    res = grid_res or field.resolution[0]
    rows = []
    for eps in sorted(eps_grid, reverse=True):
        params = MixingParams(kappa, eps, eps * center_fraction, res)
        rows.append((eps, mixes_at_scale(field, params, backend=backend)))
    certified = None
    for eps, verdict in rows:
        if not verdict.passed:
            break
        certified = eps
    return ScanResult(kappa, tuple(rows), certified)


SCAN_COLUMNS = ("epsilon", "passed", "worst_low_frac", "worst_low_x1", "worst_low_x2",
                "worst_high_frac", "worst_high_x1", "worst_high_x2", "centers_tested", "tol")


def write_scan_csv(scan: ScanResult, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SCAN_COLUMNS)
        for eps, v in scan.rows:
            w.writerow([repr(eps), int(v.passed), repr(v.worst_low[1]), repr(v.worst_low[0][0]),
                        repr(v.worst_low[0][1]), repr(v.worst_high[1]), repr(v.worst_high[0][0]),
                        repr(v.worst_high[0][1]), v.centers_tested, repr(v.tol)])
