import os
import subprocess
import sys

import numpy as np
import pytest

from torusmix import kernels
from torusmix.flow import AlternatingSineShear, FlowSpec

needs_ext = pytest.mark.skipif("cython" not in kernels.available_backends(),
                               reason="compiled extension not built")


def _table():
    spec = FlowSpec(AlternatingSineShear(2.0, 2, 0.3), steps=64)
    return spec, spec.step_table()


@needs_ext
def test_ball_counts_identical(rng):
    samples = (rng.random((300, 300)) < 0.4).astype(np.uint8)
    c1, c2 = rng.random(500), rng.random(500)
    for eps in (0.013, 0.1, 0.25):
        a = kernels.ball_counts(samples, c1, c2, eps, backend="python")
        b = kernels.ball_counts(samples, c1, c2, eps, backend="cython")
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@needs_ext
def test_rk4_agrees():
    spec, (kinds, p0, p1) = _table()
    out = {}
    for name in ("python", "cython"):
        x1, x2 = np.linspace(0, 1, 400, endpoint=False), np.linspace(0.3, 0.9, 400)
        g = np.tile([1.0, 0.0, 0.0, 1.0], (400, 1))
        kernels.rk4_advance(x1, x2, g, kinds, p0, p1, spec.h, backend=name)
        out[name] = np.concatenate([x1, x2, g.ravel()])
    scale = max(1.0, np.abs(out["python"]).max())
    assert np.abs(out["python"] - out["cython"]).max() <= 1e-13 * scale


@needs_ext
def test_greedy_pack_identical(rng):
    p1, p2 = rng.random(2000), rng.random(2000)
    a = kernels.greedy_pack(p1, p2, 0.15, backend="python")
    b = kernels.greedy_pack(p1, p2, 0.15, backend="cython")
    assert np.array_equal(a, b)


def test_threads_do_not_change_results(rng):
    samples = (rng.random((256, 256)) < 0.5).astype(np.uint8)
    c1, c2 = rng.random(1000), rng.random(1000)
    old = kernels.get_threads()
    try:
        kernels.set_threads(1)
        a = kernels.ball_counts(samples, c1, c2, 0.05)
        kernels.set_threads(4)
        b = kernels.ball_counts(samples, c1, c2, 0.05)
    finally:
        kernels.set_threads(old)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_backend_env_selection():
    code = "import torusmix.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, TORUSMIX_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
