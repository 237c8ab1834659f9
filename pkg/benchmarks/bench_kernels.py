"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--threads 1]

Prints one row per kernel with the best wall time of each backend, the
speedup, and whether the outputs agree (counts and packings exactly,
trajectories to rounding).
"""

import argparse
import time

import numpy as np

from torusmix import kernels
from torusmix.flow import AlternatingSineShear, FlowSpec


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_ball_counts(backend, rng):
    samples = (rng.random((1024, 1024)) < 0.5).astype(np.uint8)
    c1, c2 = np.meshgrid(np.arange(64) / 64, np.arange(64) / 64, indexing="ij")
    c1, c2 = c1.ravel(), c2.ravel()
    return lambda: kernels.ball_counts(samples, c1, c2, 0.05, backend=backend)


def bench_rk4(backend, rng):
    spec = FlowSpec(AlternatingSineShear(2.0, 1, 0.25), steps=200)
    kinds, p0, p1 = spec.step_table()
    x1, x2 = rng.random(20000), rng.random(20000)

    def run():
        a, b = x1.copy(), x2.copy()
        g = np.tile([1.0, 0.0, 0.0, 1.0], (a.size, 1))
        kernels.rk4_advance(a, b, g, kinds, p0, p1, spec.h, backend=backend)
        return a, b, g

    return run


def bench_pack(backend, rng):
    p1, p2 = rng.random(20000), rng.random(20000)
    return lambda: (kernels.greedy_pack(p1, p2, 0.04, backend=backend),)


def agree(name, a, b):
    if name == "rk4_advance":
        return all(np.abs(x - y).max() <= 1e-12 * max(1.0, np.abs(x).max()) for x, y in zip(a, b))
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    kernels.set_threads(args.threads)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; threads: {kernels.get_threads()}")
    print(f"{'kernel':<14}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}  agree")
    for name, make in (("ball_counts", bench_ball_counts), ("rk4_advance", bench_rk4),
                       ("greedy_pack", bench_pack)):
        times, outs = {}, {}
        for b in backends:
            times[b], outs[b] = best_time(make(b, np.random.default_rng(0)), args.repeat)
        row = f"{name:<14}" + "".join(f"{times[b]:>11.3f}s" for b in backends)
        if "cython" in times:
            same = agree(name, outs["python"], outs["cython"])
            row += f"{times['python'] / times['cython']:>9.1f}x  {same}"
        print(row)


if __name__ == "__main__":
    main()
