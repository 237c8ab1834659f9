"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` operation for operation. Integer outputs
(counts, packing indices) agree exactly between backends; trajectories agree
to rounding, since numpy and libm may differ by an ulp in sin/cos.
"""

import math

import numpy as np

BACKEND = "python"

TWO_PI = 2.0 * math.pi

# steady field piece codes shared with the compiled core
ZERO, CONSTANT, SINE_X, SINE_Y = 0, 1, 2, 3

_GATHER_BUDGET = 1 << 22


def window_width(eps, n):
    return int(math.ceil(2.0 * eps * n)) + 2


def ball_counts(samples, c1, c2, eps):
    """Count cells inside, and true cells inside, the eps-ball of each center.

    A cell belongs to the ball when its center satisfies dx*dx + dy*dy < eps*eps,
    with dx, dy the displacement to the nearest periodic copy.
    """
    n1, n2 = samples.shape
    c1 = np.ascontiguousarray(c1, dtype=np.float64)
    c2 = np.ascontiguousarray(c2, dtype=np.float64)
    m = c1.shape[0]
    inside = np.zeros(m, dtype=np.int64)
    hits = np.zeros(m, dtype=np.int64)
    w1 = window_width(eps, n1)
    w2 = window_width(eps, n2)
    r2 = eps * eps
    off1 = np.arange(w1)
    off2 = np.arange(w2)
    chunk = max(1, _GATHER_BUDGET // (w1 * w2))
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        a = c1[lo:hi]
        b = c2[lo:hi]
        i0 = np.floor((a - eps) * n1 - 0.5).astype(np.int64)
        j0 = np.floor((b - eps) * n2 - 0.5).astype(np.int64)
        ii = i0[:, None] + off1[None, :]
        jj = j0[:, None] + off2[None, :]
        dx = (ii + 0.5) / n1 - a[:, None]
        dy = (jj + 0.5) / n2 - b[:, None]
        mask = (dx * dx)[:, :, None] + (dy * dy)[:, None, :] < r2
        vals = samples[np.mod(ii, n1)[:, :, None], np.mod(jj, n2)[:, None, :]]
        inside[lo:hi] = mask.sum(axis=(1, 2))
        hits[lo:hi] = (mask & (vals != 0)).sum(axis=(1, 2))
    return inside, hits


def _velocity(kind, p0, p1, x1, x2):
    if kind == SINE_X:
        return p0 * np.sin(TWO_PI * p1 * x2), np.zeros_like(x1)
    if kind == SINE_Y:
        return np.zeros_like(x1), p0 * np.sin(TWO_PI * p1 * x1)
    if kind == CONSTANT:
        return np.full_like(x1, p0), np.full_like(x1, p1)
    return np.zeros_like(x1), np.zeros_like(x1)


def _gradient(kind, p0, p1, x1, x2):
    """Entries (a11, a12, a21, a22) of dF^i/dx_j."""
    z = np.zeros_like(x1)
    if kind == SINE_X:
        return z, TWO_PI * p1 * p0 * np.cos(TWO_PI * p1 * x2), z, z
    if kind == SINE_Y:
        return z, z, TWO_PI * p1 * p0 * np.cos(TWO_PI * p1 * x1), z
    return z, z, z, z


def _rhs(kind, p0, p1, x1, x2, g):
    v1, v2 = _velocity(kind, p0, p1, x1, x2)
    if g is None:
        return v1, v2, None
    a11, a12, a21, a22 = _gradient(kind, p0, p1, x1, x2)
    g11, g12, g21, g22 = g
    dg = (
        a11 * g11 + a12 * g21,
        a11 * g12 + a12 * g22,
        a21 * g11 + a22 * g21,
        a21 * g12 + a22 * g22,
    )
    return v1, v2, dg


def rk4_advance(x1, x2, g, kinds, p0, p1, h):
    """Advance trajectories in place through one RK4 step per table entry.

    ``g`` is an (N, 4) array holding d11, d12, d21, d22 or None when only
    positions are needed. Positions are wrapped into [0, 1) after every step.
    """
    grad = g is not None and g.shape[0] > 0
    for s in range(len(kinds)):
        kind = int(kinds[s])
        a = float(p0[s])
        b = float(p1[s])
        gs = (g[:, 0], g[:, 1], g[:, 2], g[:, 3]) if grad else None
        k1 = _rhs(kind, a, b, x1, x2, gs)
        k2 = _rhs(kind, a, b, x1 + 0.5 * h * k1[0], x2 + 0.5 * h * k1[1],
                  _shift(gs, k1[2], 0.5 * h))
        k3 = _rhs(kind, a, b, x1 + 0.5 * h * k2[0], x2 + 0.5 * h * k2[1],
                  _shift(gs, k2[2], 0.5 * h))
        k4 = _rhs(kind, a, b, x1 + h * k3[0], x2 + h * k3[1],
                  _shift(gs, k3[2], h))
        w = h / 6.0
        y1 = x1 + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        y2 = x2 + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        x1[:] = y1 - np.floor(y1)
        x2[:] = y2 - np.floor(y2)
        x1[x1 >= 1.0] = 0.0
        x2[x2 >= 1.0] = 0.0
        if grad:
            for c in range(4):
                g[:, c] = gs[c] + w * (k1[2][c] + 2.0 * k2[2][c] + 2.0 * k3[2][c] + k4[2][c])


def _shift(g, dg, f):
    if g is None:
        return None
    return tuple(gc + f * dc for gc, dc in zip(g, dg))


def greedy_pack(p1, p2, sep):
    """Farthest-first traversal seeded at index 0.

    Returns the indices of the chosen centers. Every accepted center is at
    squared distance > sep**2 from all earlier ones; the loop stops once
    every point lies within sep of some center.
    """
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if p1.size == 0:
        return np.zeros(0, dtype=np.int64)
    sep2 = sep * sep
    mind = np.full(p1.shape[0], np.inf)
    chosen = [0]
    c = 0
    while True:
        dx = np.abs(p1 - p1[c])
        dy = np.abs(p2 - p2[c])
        dx = np.minimum(dx, 1.0 - dx)
        dy = np.minimum(dy, 1.0 - dy)
        np.minimum(mind, dx * dx + dy * dy, out=mind)
        c = int(np.argmax(mind))
        if not mind[c] > sep2:
            break
        chosen.append(c)
    return np.asarray(chosen, dtype=np.int64)
