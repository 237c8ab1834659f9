"""Analytic diffeomorphisms of the torus built from composable stages.

Every stage has a closed-form forward map, inverse and Jacobian. A
:class:`MapDescriptor` applies its stages left to right, wrapping after each.
The array methods ``forward``, ``backward`` and ``jacobian_arrays`` form the
map protocol consumed by the mixing and energy modules; flow time-1 maps
implement the same three methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import TorusPoint, periodic_delta, wrap_array

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Jacobian2:
    d11: float
    d12: float
    d21: float
    d22: float

    @property
    def det(self):
        return self.d11 * self.d22 - self.d12 * self.d21

    def as_tuple(self):
        return (self.d11, self.d12, self.d21, self.d22)


def _const(value, like):
    return np.full(np.shape(like), float(value))


@dataclass(frozen=True)
class Identity:
    kind = "identity"

    def forward(self, x1, x2):
        return x1, x2

    backward = forward

    def jacobian(self, x1, x2):
        one, zero = _const(1, x1), _const(0, x1)
        return one, zero, zero, one


@dataclass(frozen=True)
class IntegerLinear:
    """x -> M x mod 1 for an integer matrix M with det ±1."""

    kind = "linear"
    matrix: tuple = ((1, 0), (0, 1))

    def __post_init__(self):
        m = tuple(tuple(int(v) for v in row) for row in self.matrix)
        if len(m) != 2 or any(len(r) != 2 for r in m):
            raise DomainError("linear stage needs a 2x2 matrix")
        if any(float(v) != float(w) for r, s in zip(m, self.matrix) for v, w in zip(r, s)):
            raise DomainError(f"linear stage entries must be integers, got {self.matrix}")
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] not in (1, -1):
            raise DomainError(f"linear stage must have det ±1, got {self.matrix}")
        object.__setattr__(self, "matrix", m)

    @property
    def det(self):
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    def forward(self, x1, x2):
        (a, b), (c, d) = self.matrix
        return a * x1 + b * x2, c * x1 + d * x2

    def backward(self, x1, x2):
        (a, b), (c, d) = self.matrix
        s = self.det
        return s * (d * x1 - b * x2), s * (-c * x1 + a * x2)

    def jacobian(self, x1, x2):
        (a, b), (c, d) = self.matrix
        return _const(a, x1), _const(b, x1), _const(c, x1), _const(d, x1)


@dataclass(frozen=True)
class HorizontalSineShear:
    """x1 <- x1 + a sin(2 pi k x2)."""

    kind = "hsine"
    a: float = 0.0
    k: int = 1

    def __post_init__(self):
        _check_frequency(self.k)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "k", int(self.k))

    def forward(self, x1, x2):
        return x1 + self.a * np.sin(TWO_PI * self.k * x2), x2

    def backward(self, x1, x2):
        return x1 - self.a * np.sin(TWO_PI * self.k * x2), x2

    def jacobian(self, x1, x2):
        one, zero = _const(1, x1), _const(0, x1)
        return one, TWO_PI * self.k * self.a * np.cos(TWO_PI * self.k * x2), zero, one


@dataclass(frozen=True)
class VerticalSineShear:
    """x2 <- x2 + a sin(2 pi k x1)."""

    kind = "vsine"
    a: float = 0.0
    k: int = 1

    def __post_init__(self):
        _check_frequency(self.k)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "k", int(self.k))

    def forward(self, x1, x2):
        return x1, x2 + self.a * np.sin(TWO_PI * self.k * x1)

    def backward(self, x1, x2):
        return x1, x2 - self.a * np.sin(TWO_PI * self.k * x1)

    def jacobian(self, x1, x2):
        one, zero = _const(1, x1), _const(0, x1)
        return one, zero, TWO_PI * self.k * self.a * np.cos(TWO_PI * self.k * x1), one


@dataclass(frozen=True)
class HorizontalLinearShear:
    """x1 <- x1 + n x2."""

    kind = "hshear"
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n", _integer(self.n, "n"))

    def forward(self, x1, x2):
        return x1 + self.n * x2, x2

    def backward(self, x1, x2):
        return x1 - self.n * x2, x2

    def jacobian(self, x1, x2):
        one, zero = _const(1, x1), _const(0, x1)
        return one, _const(self.n, x1), zero, one


@dataclass(frozen=True)
class VerticalLinearShear:
    """x2 <- x2 + n x1."""

    kind = "vshear"
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n", _integer(self.n, "n"))

    def forward(self, x1, x2):
        return x1, x2 + self.n * x1

    def backward(self, x1, x2):
        return x1, x2 - self.n * x1

    def jacobian(self, x1, x2):
        one, zero = _const(1, x1), _const(0, x1)
        return one, zero, _const(self.n, x1), one


def _check_frequency(k):
    if int(k) != k or int(k) < 1:
        raise DomainError(f"sine-shear frequency must be a positive integer, got {k}")


def _integer(v, name):
    if isinstance(v, bool) or int(v) != v:
        raise DomainError(f"{name} must be an integer, got {v}")
    return int(v)


STAGE_KINDS = {
    cls.kind: cls
    for cls in (Identity, IntegerLinear, HorizontalSineShear, VerticalSineShear,
                HorizontalLinearShear, VerticalLinearShear)
}


def _chain(a, b):
    """Matrix product a @ b of two Jacobians given as 4-tuples of arrays."""
    a11, a12, a21, a22 = a
    b11, b12, b21, b22 = b
    return (a11 * b11 + a12 * b21, a11 * b12 + a12 * b22,
            a21 * b11 + a22 * b21, a21 * b12 + a22 * b22)


@dataclass(frozen=True)
class MapDescriptor:
    stages: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    def forward(self, x1, x2):
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        for st in self.stages:
            y1, y2 = st.forward(x1, x2)
            x1, x2 = wrap_array(y1), wrap_array(y2)
        return x1, x2

    def backward(self, x1, x2):
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        for st in reversed(self.stages):
            y1, y2 = st.backward(x1, x2)
            x1, x2 = wrap_array(y1), wrap_array(y2)
        return x1, x2

    def jacobian_arrays(self, x1, x2):
        """Chain-rule product of stage Jacobians at the running image point."""
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        one, zero = np.ones_like(x1), np.zeros_like(x1)
        jac = (one, zero, zero, one)
        for st in self.stages:
            jac = _chain(st.jacobian(x1, x2), jac)
            y1, y2 = st.forward(x1, x2)
            x1, x2 = wrap_array(y1), wrap_array(y2)
        return jac

    @property
    def area_preserving(self):
        return True

    @property
    def orientation_reversing(self):
        sign = 1
        for st in self.stages:
            if isinstance(st, IntegerLinear):
                sign *= st.det
        return sign < 0

    def then(self, other):
        return MapDescriptor(self.stages + tuple(other.stages))

    def to_config(self):
        """List of stage tables, suitable for ``[[stage]]`` TOML arrays."""
        out = []
        for st in self.stages:
            entry = {"kind": st.kind}
            for f in fields(st):
                v = getattr(st, f.name)
                entry[f.name] = [list(r) for r in v] if f.name == "matrix" else v
            out.append(entry)
        return out

    @classmethod
    def from_config(cls, entries):
        stages = []
        for entry in entries:
            entry = dict(entry)
            kind = entry.pop("kind", None)
            if kind not in STAGE_KINDS:
                raise ConfigError(f"unknown stage kind {kind!r}; expected one of {sorted(STAGE_KINDS)}")
            stage_cls = STAGE_KINDS[kind]
            allowed = {f.name for f in fields(stage_cls)}
            extra = set(entry) - allowed
            if extra:
                raise ConfigError(f"stage {kind!r}: unknown keys {sorted(extra)}")
            if "matrix" in entry:
                entry["matrix"] = tuple(tuple(r) for r in entry["matrix"])
            try:
                stages.append(stage_cls(**entry))
            except (DomainError, TypeError) as exc:
                raise ConfigError(f"stage {kind!r}: {exc}") from exc
        return cls(tuple(stages))

    def describe(self):
        parts = []
        for st in self.stages:
            args = ", ".join(f"{f.name}={getattr(st, f.name)!r}" for f in fields(st))
            parts.append(f"{st.kind}({args})")
        return " ; ".join(parts) or "identity()"


def compose(*stages):
    return MapDescriptor(tuple(stages))


def _point_op(fn, p):
    y1, y2 = fn(np.array([p.x1]), np.array([p.x2]))
    return TorusPoint(float(y1[0]), float(y2[0]))


def apply(m, p: TorusPoint) -> TorusPoint:
    return _point_op(m.forward, p)


def inverse(m, p: TorusPoint) -> TorusPoint:
    return _point_op(m.backward, p)


def jacobian(m, p: TorusPoint) -> Jacobian2:
    d = m.jacobian_arrays(np.array([p.x1]), np.array([p.x2]))
    return Jacobian2(*(float(v[0]) for v in d))


def jacobian_numeric_arrays(m, x1, x2, h=1e-5):
    """Central differences with nearest-branch unwrapping of the image points."""
    if not (0.0 < h <= 1e-3):
        raise DomainError(f"finite-difference step must lie in (0, 1e-3], got {h}")
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    f1, f2 = m.forward(x1, x2)
    cols = []
    for e1, e2 in ((h, 0.0), (0.0, h)):
        p1, p2 = m.forward(wrap_array(x1 + e1), wrap_array(x2 + e2))
        q1, q2 = m.forward(wrap_array(x1 - e1), wrap_array(x2 - e2))
        cols.append(((periodic_delta(p1 - f1) - periodic_delta(q1 - f1)) / (2 * h),
                     (periodic_delta(p2 - f2) - periodic_delta(q2 - f2)) / (2 * h)))
    (d11, d21), (d12, d22) = cols
    return d11, d12, d21, d22


def jacobian_numeric(m, p: TorusPoint, h=1e-5) -> Jacobian2:
    d = jacobian_numeric_arrays(m, np.array([p.x1]), np.array([p.x2]), h)
    return Jacobian2(*(float(v[0]) for v in d))


def in_reference_set(x2):
    """Membership in A = {0 <= x2 < 1/2}."""
    return np.asarray(x2) < 0.5


def membership_array(m, x1, x2):
    _, y2 = m.backward(x1, x2)
    return in_reference_set(y2)


def membership_in_image(m, p: TorusPoint) -> bool:
    """True iff p lies in the image of A, tested through the exact inverse."""
    return bool(membership_array(m, np.array([p.x1]), np.array([p.x2]))[0])


# named members of the test corpus
def identity():
    return MapDescriptor((Identity(),))


def vshear(n):
    return MapDescriptor((VerticalLinearShear(n),))


def hshear(n):
    return MapDescriptor((HorizontalLinearShear(n),))


def hsine(a, k=1):
    return MapDescriptor((HorizontalSineShear(a, k),))


def vsine(a, k=1):
    return MapDescriptor((VerticalSineShear(a, k),))


def alternating_sine(a, k=1, rounds=4):
    """rounds x (horizontal then vertical sine shear), a generic smooth mixer."""
    stages = []
    for _ in range(rounds):
        stages += [HorizontalSineShear(a, k), VerticalSineShear(a, k)]
    return MapDescriptor(tuple(stages))


def cat_map():
    return MapDescriptor((IntegerLinear(((2, 1), (1, 1))),))


def zoo():
    """Named maps covering every stage kind."""
    return {
        "identity": identity(),
        "vshear10": vshear(10),
        "vshear3": vshear(3),
        "hshear1": hshear(1),
        "hsine": hsine(0.25, 1),
        "vsine": vsine(0.2, 2),
        "alt-sine": alternating_sine(0.15, 1, rounds=3),
        "cat": cat_map(),
        "flip": MapDescriptor((IntegerLinear(((0, 1), (1, 0))),)),
        "mixed": MapDescriptor((HorizontalSineShear(0.1, 2), VerticalLinearShear(2),
                                IntegerLinear(((1, 1), (0, 1))), VerticalSineShear(0.05, 3))),
    }
