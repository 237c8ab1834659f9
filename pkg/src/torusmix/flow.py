"""Trajectories, flow Jacobians and determinant tracking for zoo vector fields.

Each zoo field is piecewise steady in time. A fixed-step RK4 sweep looks up
the steady piece active at the midpoint of every step and integrates the
augmented system (position, grad) where grad obeys the variational equation
d/dt grad = DF(Phi_t) grad. Positions are wrapped after each step; grad is
translation invariant and accumulates unwrapped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields

import numpy as np

from . import kernels
from .errors import ConfigError, DomainError, IntegrationError
from .geometry import TorusPoint, cell_centers, periodic_delta
from .maps import Jacobian2, TWO_PI, in_reference_set

SQRT6 = math.sqrt(6.0)
MIN_STEPS = 16


def piece_velocity(kind, p0, p1, x1, x2):
    z = np.zeros_like(x1)
    if kind == kernels.SINE_X:
        return p0 * np.sin(TWO_PI * p1 * x2), z
    if kind == kernels.SINE_Y:
        return z, p0 * np.sin(TWO_PI * p1 * x1)
    if kind == kernels.CONSTANT:
        return z + p0, z + p1
    return z, z


def piece_gradient(kind, p0, p1, x1, x2):
    """(a11, a12, a21, a22) with a_ij = dF^i / dx_j."""
    z = np.zeros_like(np.asarray(x1, dtype=np.float64))
    if kind == kernels.SINE_X:
        return z, TWO_PI * p1 * p0 * np.cos(TWO_PI * p1 * x2), z, z
    if kind == kernels.SINE_Y:
        return z, z, TWO_PI * p1 * p0 * np.cos(TWO_PI * p1 * x1), z
    return z, z, z, z


def frobenius(a):
    return np.sqrt(sum(c * c for c in a))


class _Field:
    divergence_free = True

    def piece(self, t):
        """(kind code, p0, p1) of the steady field active at time t."""
        raise NotImplementedError

    def to_config(self):
        return {"kind": self.kind, **{f.name: getattr(self, f.name) for f in fields(self)}}

    def velocity(self, t, x1, x2):
        return piece_velocity(*self.piece(t), np.asarray(x1, float), np.asarray(x2, float))

    def gradient(self, t, x1, x2):
        return piece_gradient(*self.piece(t), np.asarray(x1, float), np.asarray(x2, float))

    def gradient_norm(self, t, x1, x2):
        """|grad_x F| in the Frobenius norm."""
        return frobenius(self.gradient(t, x1, x2))


@dataclass(frozen=True)
class Zero(_Field):
    kind = "zero"

    def piece(self, t):
        return kernels.ZERO, 0.0, 0.0


@dataclass(frozen=True)
class Constant(_Field):
    kind = "constant"
    u: float = 0.0
    v: float = 0.0

    def piece(self, t):
        return kernels.CONSTANT, float(self.u), float(self.v)


@dataclass(frozen=True)
class SteadySineShearX(_Field):
    """F = (u sin(2 pi k x2), 0)."""

    kind = "sine-x"
    u: float = 1.0
    k: int = 1

    def __post_init__(self):
        _check_k(self.k)

    def piece(self, t):
        return kernels.SINE_X, float(self.u), float(self.k)


@dataclass(frozen=True)
class SteadySineShearY(_Field):
    """F = (0, v sin(2 pi k x1))."""

    kind = "sine-y"
    v: float = 1.0
    k: int = 1

    def __post_init__(self):
        _check_k(self.k)

    def piece(self, t):
        return kernels.SINE_Y, float(self.v), float(self.k)


@dataclass(frozen=True)
class AlternatingSineShear(_Field):
    """Horizontal sine shear on even half-periods, vertical on odd ones."""

    kind = "alternating"
    u: float = 0.4
    k: int = 1
    period: float = 0.25

    def __post_init__(self):
        _check_k(self.k)
        if not self.period > 0:
            raise DomainError(f"alternating period must be positive, got {self.period}")

    def piece(self, t):
        j = int(math.floor(t / (0.5 * self.period)))
        if j % 2 == 0:
            return kernels.SINE_X, float(self.u), float(self.k)
        return kernels.SINE_Y, float(self.u), float(self.k)


def _check_k(k):
    if int(k) != k or k < 1:
        raise DomainError(f"field frequency must be a positive integer, got {k}")


FIELD_KINDS = {cls.kind: cls for cls in (Zero, Constant, SteadySineShearX,
                                         SteadySineShearY, AlternatingSineShear)}


@dataclass(frozen=True)
class FlowSpec:
    field: _Field
    steps: int = 200

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < MIN_STEPS:
            raise DomainError(f"flow needs an integer step count >= {MIN_STEPS}, got {self.steps}")

    @property
    def h(self):
        return 1.0 / self.steps

    def step_table(self, reverse=False):
        """Per-step steady pieces. Reverse time integrates -F(1 - t, x)."""
        h = self.h
        kinds = np.empty(self.steps, dtype=np.int8)
        p0 = np.empty(self.steps)
        p1 = np.empty(self.steps)
        for n in range(self.steps):
            tm = (n + 0.5) * h
            kind, a, b = self.field.piece(1.0 - tm if reverse else tm)
            if reverse:
                a = -a
                if kind == kernels.CONSTANT:
                    b = -b
            kinds[n], p0[n], p1[n] = kind, a, b
        return kinds, p0, p1

    def with_steps(self, steps):
        return FlowSpec(self.field, steps)

    def to_config(self):
        return {**self.field.to_config(), "steps": self.steps}

    @classmethod
    def from_config(cls, table):
        table = dict(table)
        kind = table.pop("kind", None)
        steps = table.pop("steps", 200)
        if kind not in FIELD_KINDS:
            raise ConfigError(f"unknown flow kind {kind!r}; expected one of {sorted(FIELD_KINDS)}")
        fcls = FIELD_KINDS[kind]
        extra = set(table) - {f.name for f in fields(fcls)}
        if extra:
            raise ConfigError(f"flow {kind!r}: unknown keys {sorted(extra)}")
        try:
            return cls(fcls(**table), steps)
        except (DomainError, TypeError) as exc:
            raise ConfigError(f"flow {kind!r}: {exc}") from exc

    def describe(self):
        args = ", ".join(f"{f.name}={getattr(self.field, f.name)!r}" for f in fields(self.field))
        return f"{self.field.kind}({args}) steps={self.steps}"


@dataclass(frozen=True)
class FlowState:
    t: float
    pos: TorusPoint
    grad: Jacobian2
    detJ: float


def _identity_grads(n):
    g = np.zeros((n, 4))
    g[:, 0] = 1.0
    g[:, 3] = 1.0
    return g


def _check_finite(*arrays):
    for a in arrays:
        if a is not None and not np.all(np.isfinite(a)):
            raise IntegrationError("flow integration produced non-finite values")


def advance(spec, x1, x2, g=None, start=0, stop=None, reverse=False, table=None):
    """RK4 steps ``start..stop`` applied in place to (x1, x2[, g])."""
    kinds, p0, p1 = table if table is not None else spec.step_table(reverse)
    stop = spec.steps if stop is None else stop
    kernels.rk4_advance(x1, x2, g, kinds[start:stop], p0[start:stop], p1[start:stop], spec.h)
    _check_finite(x1, x2, g)


def flow_arrays(spec, x1, x2, with_grad=False, reverse=False):
    """Integrate many starting points over [0, 1]. Returns (x1, x2, grads or None)."""
    x1 = np.array(x1, dtype=np.float64, copy=True).ravel()
    x2 = np.array(x2, dtype=np.float64, copy=True).ravel()
    _check_finite(x1, x2)
    g = _identity_grads(x1.size) if with_grad else None
    advance(spec, x1, x2, g, reverse=reverse)
    return x1, x2, g


def integrate_flow(spec: FlowSpec, x0: TorusPoint) -> FlowState:
    x1, x2, g = flow_arrays(spec, [x0.x1], [x0.x2], with_grad=True)
    grad = Jacobian2(*(float(v) for v in g[0]))
    return FlowState(1.0, TorusPoint(float(x1[0]), float(x2[0])), grad, grad.det)


class FlowMap:
    """Time-1 map of a flow with the map protocol (forward/backward/jacobian_arrays)."""

    area_preserving = True
    orientation_reversing = False

    def __init__(self, spec: FlowSpec):
        self.spec = spec

    def forward(self, x1, x2):
        shape = np.shape(x1)
        y1, y2, _ = flow_arrays(self.spec, x1, x2)
        return y1.reshape(shape), y2.reshape(shape)

    def backward(self, x1, x2):
        shape = np.shape(x1)
        y1, y2, _ = flow_arrays(self.spec, x1, x2, reverse=True)
        return y1.reshape(shape), y2.reshape(shape)

    def jacobian_arrays(self, x1, x2):
        shape = np.shape(x1)
        _, _, g = flow_arrays(self.spec, x1, x2, with_grad=True)
        return tuple(g[:, c].reshape(shape) for c in range(4))

    def roundtrip_error(self, x1, x2):
        """Max torus displacement of backward(forward(x)) from x."""
        y1, y2 = self.backward(*self.forward(x1, x2))
        d1 = periodic_delta(y1 - np.asarray(x1))
        d2 = periodic_delta(y2 - np.asarray(x2))
        return float(np.max(np.hypot(d1, d2)))

    def describe(self):
        return f"time-1 map of {self.spec.describe()}"


def time1_map(spec: FlowSpec) -> FlowMap:
    return FlowMap(spec)


DET_RTOL = 1e-11


def det_floor(kappa_prime, frob2_max):
    """Smallest sampled |detJ| accepted as ``|detJ| >= kappa_prime``.

    A 2x2 determinant with entries of size s carries rounding error of order
    eps_mach * s^2, so the slack scales with max |J|_F^2.
    """
    return kappa_prime * (1 - 1e-12) - DET_RTOL * max(1.0, frob2_max)


def check_near_incompressible(spec: FlowSpec, grid_res=32, t_samples=10, with_scale=False):
    """(min |detJ|, max |detJ|) over grid starts and ``t_samples`` uniform times.

    With ``with_scale`` the max of |J|_F^2 over the same samples is appended.
    """
    if grid_res < 16:
        raise DomainError(f"grid_res must be >= 16, got {grid_res}")
    if t_samples < 1:
        raise DomainError(f"t_samples must be >= 1, got {t_samples}")
    c1, c2 = cell_centers(grid_res, grid_res)
    x1, x2 = c1.ravel().copy(), c2.ravel().copy()
    g = _identity_grads(x1.size)
    table = spec.step_table()
    lo, hi, f2 = math.inf, -math.inf, 0.0
    done = 0
    for j in range(1, t_samples + 1):
        stop = int(round(j * spec.steps / t_samples))
        advance(spec, x1, x2, g, done, stop, table=table)
        done = stop
        det = np.abs(g[:, 0] * g[:, 3] - g[:, 1] * g[:, 2])
        lo = min(lo, float(det.min()))
        hi = max(hi, float(det.max()))
        f2 = max(f2, float(np.einsum("ij,ij->i", g, g).max()))
    return (lo, hi, f2) if with_scale else (lo, hi)


TRACE_COLUMNS = ("t", "x1", "x2", "d11", "d12", "d21", "d22", "detJ", "e", "gradF", "dt_e")


def trajectory_trace(spec: FlowSpec, x1, x2):
    """Per-node records along trajectories, arrays of shape (steps + 1, N).

    At node n the field piece of step n is used (the last node reuses the last
    step's piece). ``dt_e`` is d/dt e(Phi_t) from the variational right-hand
    side. ``gradF_int`` holds the per-trajectory integral of |grad F(t, Phi_t)|
    by the trapezoid rule within each step.
    """
    x1 = np.array(x1, dtype=np.float64, copy=True).ravel()
    x2 = np.array(x2, dtype=np.float64, copy=True).ravel()
    n = x1.size
    g = _identity_grads(n)
    table = spec.step_table()
    kinds, p0, p1 = table
    rec = {c: np.empty((spec.steps + 1, n)) for c in TRACE_COLUMNS}
    gradf_int = np.zeros(n)
    prev_norm = None
    for step in range(spec.steps + 1):
        piece = int(kinds[min(step, spec.steps - 1)]), p0[min(step, spec.steps - 1)], p1[min(step, spec.steps - 1)]
        a = piece_gradient(*piece, x1, x2)
        gi = (g[:, 0], g[:, 1], g[:, 2], g[:, 3])
        dg = (a[0] * gi[0] + a[1] * gi[2], a[0] * gi[1] + a[1] * gi[3],
              a[2] * gi[0] + a[3] * gi[2], a[2] * gi[1] + a[3] * gi[3])
        norm = frobenius(a)
        rec["t"][step] = step * spec.h
        rec["x1"][step] = x1
        rec["x2"][step] = x2
        for c, name in enumerate(("d11", "d12", "d21", "d22")):
            rec[name][step] = gi[c]
        rec["detJ"][step] = gi[0] * gi[3] - gi[1] * gi[2]
        rec["e"][step] = 0.5 * (gi[0] ** 2 + gi[1] ** 2 + gi[2] ** 2 + gi[3] ** 2)
        rec["gradF"][step] = norm
        rec["dt_e"][step] = sum(gc * dc for gc, dc in zip(gi, dg))
        if prev_norm is not None:
            gradf_int += 0.5 * spec.h * (prev_norm + frobenius(piece_gradient(*prev_piece, x1, x2)))
        if step < spec.steps:
            prev_piece = piece
            prev_norm = norm
            advance(spec, x1, x2, g, step, step + 1, table=table)
    rec["gradF_int"] = gradf_int
    return rec


def gronwall_check(spec: FlowSpec, x0: TorusPoint) -> float:
    """max_t [d/dt e(Phi_t) / e(Phi_t) - sqrt(6) |grad F(t, Phi_t)|] along one trajectory."""
    return float(gronwall_residuals(spec, [x0.x1], [x0.x2])[0])


def gronwall_residuals(spec: FlowSpec, x1, x2):
    rec = trajectory_trace(spec, x1, x2)
    e = rec["e"]
    if np.any(e <= 0):
        raise IntegrationError("energy density vanished along a trajectory")
    r = rec["dt_e"] / e - SQRT6 * rec["gradF"]
    return r.max(axis=0)


def integrated_gronwall_margins(spec: FlowSpec, x1, x2):
    """exp(sqrt6 * int |grad F(t, Phi_t)| dt) - e(Phi_1) per trajectory."""
    rec = trajectory_trace(spec, x1, x2)
    return np.exp(SQRT6 * rec["gradF_int"]) - rec["e"][-1]


def flow_membership_array(spec: FlowSpec, x1, x2):
    shape = np.shape(x1)
    _, y2, _ = flow_arrays(spec, x1, x2, reverse=True)
    return in_reference_set(y2).reshape(shape)


def flow_membership_in_image(spec: FlowSpec, p: TorusPoint) -> bool:
    return bool(flow_membership_array(spec, [p.x1], [p.x2])[0])


def write_trace_csv(rec, path, trajectory=0):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for step in range(rec["t"].shape[0]):
            w.writerow([repr(float(rec[c][step, trajectory])) for c in TRACE_COLUMNS])


def zoo():
    """Named divergence-free flows used as test subjects."""
    return {
        "zero": FlowSpec(Zero()),
        "constant": FlowSpec(Constant(0.3, 0.4)),
        "sine-x": FlowSpec(SteadySineShearX(1.0, 1)),
        "sine-y": FlowSpec(SteadySineShearY(0.5, 2)),
        "alt-0.2": FlowSpec(AlternatingSineShear(0.2, 1, 0.25)),
        "alt-0.4": FlowSpec(AlternatingSineShear(0.4, 1, 0.25)),
    }
