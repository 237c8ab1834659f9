"""Backend selection for the hot kernels.

The compiled core (``_ckernels``) is used when it imports; otherwise the numpy
fallback in ``_pykernels`` takes over. ``TORUSMIX_BACKEND=python`` forces the
fallback, ``TORUSMIX_BACKEND=cython`` makes a missing extension an error.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

_choice = os.environ.get("TORUSMIX_BACKEND", "auto").lower()

if _choice == "python":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        if _choice == "cython":
            raise
        _impl = _pykernels

BACKEND = _impl.BACKEND

ZERO = _pykernels.ZERO
CONSTANT = _pykernels.CONSTANT
SINE_X = _pykernels.SINE_X
SINE_Y = _pykernels.SINE_Y

_threads = os.cpu_count() or 1


def available_backends():
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        pass
    else:
        names.append("cython")
    return names


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def set_threads(n):
    global _threads
    _threads = max(1, int(n)) if n else (os.cpu_count() or 1)


def get_threads():
    return _threads


def _chunks(n, parts):
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def ball_counts(samples, c1, c2, eps, backend=None):
    impl = get_backend(backend)
    c1 = np.ascontiguousarray(c1, dtype=np.float64)
    c2 = np.ascontiguousarray(c2, dtype=np.float64)
    samples = np.ascontiguousarray(samples, dtype=np.uint8)
    spans = _chunks(c1.shape[0], _threads)
    if len(spans) <= 1:
        return impl.ball_counts(samples, c1, c2, eps)
    with ThreadPoolExecutor(len(spans)) as pool:
        parts = list(pool.map(
            lambda s: impl.ball_counts(samples, c1[s[0]:s[1]], c2[s[0]:s[1]], eps), spans))
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]))


def rk4_advance(x1, x2, g, kinds, p0, p1, h, backend=None):
    """In-place RK4 sweep; trajectories are split across worker threads."""
    impl = get_backend(backend)
    n = x1.shape[0]
    spans = _chunks(n, _threads)
    has_g = g is not None and g.shape[0] > 0

    def run(span):
        lo, hi = span
        xs, ys = x1[lo:hi], x2[lo:hi]
        gs = g[lo:hi] if has_g else None
        impl.rk4_advance(xs, ys, gs, kinds, p0, p1, h)

    if len(spans) <= 1:
        impl.rk4_advance(x1, x2, g if has_g else None, kinds, p0, p1, h)
        return
    with ThreadPoolExecutor(len(spans)) as pool:
        list(pool.map(run, spans))


def greedy_pack(p1, p2, sep, backend=None):
    return get_backend(backend).greedy_pack(p1, p2, sep)
