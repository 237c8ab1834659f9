# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, floor, ceil, fabs, INFINITY

cnp.import_array()

BACKEND = "cython"

cdef double TWO_PI = 6.283185307179586

cdef enum:
    ZERO = 0
    CONSTANT = 1
    SINE_X = 2
    SINE_Y = 3


def window_width(double eps, Py_ssize_t n):
    return <Py_ssize_t>ceil(2.0 * eps * n) + 2


def ball_counts(const unsigned char[:, ::1] samples, c1, c2, double eps):
    cdef const double[::1] a = np.ascontiguousarray(c1, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(c2, dtype=np.float64)
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n1 = samples.shape[0]
    cdef Py_ssize_t n2 = samples.shape[1]
    inside_arr = np.zeros(m, dtype=np.int64)
    hits_arr = np.zeros(m, dtype=np.int64)
    cdef long long[::1] inside = inside_arr
    cdef long long[::1] hits = hits_arr
    cdef Py_ssize_t w1 = window_width(eps, n1)
    cdef Py_ssize_t w2 = window_width(eps, n2)
    cdef double r2 = eps * eps
    cdef Py_ssize_t c, p, q, i, j, ii, jj, i0, j0
    cdef double dx, dy, dx2
    cdef long long cin, chit
    with nogil:
        for c in range(m):
            i0 = <Py_ssize_t>floor((a[c] - eps) * n1 - 0.5)
            j0 = <Py_ssize_t>floor((b[c] - eps) * n2 - 0.5)
            cin = 0
            chit = 0
            for p in range(w1):
                i = i0 + p
                dx = (i + 0.5) / n1 - a[c]
                dx2 = dx * dx
                ii = i % n1
                if ii < 0:
                    ii += n1
                for q in range(w2):
                    j = j0 + q
                    dy = (j + 0.5) / n2 - b[c]
                    if dx2 + dy * dy < r2:
                        jj = j % n2
                        if jj < 0:
                            jj += n2
                        cin += 1
                        if samples[ii, jj] != 0:
                            chit += 1
            inside[c] = cin
            hits[c] = chit
    return inside_arr, hits_arr


cdef inline void _rhs(int kind, double p0, double p1, double x1, double x2,
                      double g11, double g12, double g21, double g22,
                      bint grad, double* out) noexcept nogil:
    cdef double a12 = 0.0
    cdef double a21 = 0.0
    out[0] = 0.0
    out[1] = 0.0
    if kind == SINE_X:
        out[0] = p0 * sin(TWO_PI * p1 * x2)
        if grad:
            a12 = TWO_PI * p1 * p0 * cos(TWO_PI * p1 * x2)
    elif kind == SINE_Y:
        out[1] = p0 * sin(TWO_PI * p1 * x1)
        if grad:
            a21 = TWO_PI * p1 * p0 * cos(TWO_PI * p1 * x1)
    elif kind == CONSTANT:
        out[0] = p0
        out[1] = p1
    if grad:
        out[2] = a12 * g21
        out[3] = a12 * g22
        out[4] = a21 * g11
        out[5] = a21 * g12


def rk4_advance(double[::1] x1, double[::1] x2, g, kinds, p0, p1, double h):
    cdef Py_ssize_t n = x1.shape[0]
    cdef const signed char[::1] kd = np.ascontiguousarray(kinds, dtype=np.int8)
    cdef const double[::1] q0 = np.ascontiguousarray(p0, dtype=np.float64)
    cdef const double[::1] q1 = np.ascontiguousarray(p1, dtype=np.float64)
    cdef Py_ssize_t steps = kd.shape[0]
    cdef bint grad = g is not None and g.shape[0] > 0
    cdef double[:, ::1] gv
    if grad:
        gv = g
    cdef Py_ssize_t s, t, c
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double y[6]
    cdef double hh = 0.5 * h
    cdef double w = h / 6.0
    cdef int kind
    cdef double a, b
    with nogil:
        for t in range(n):
            y[0] = x1[t]
            y[1] = x2[t]
            if grad:
                for c in range(4):
                    y[2 + c] = gv[t, c]
            else:
                y[2] = 0.0
                y[3] = 0.0
                y[4] = 0.0
                y[5] = 0.0
            for s in range(steps):
                kind = kd[s]
                a = q0[s]
                b = q1[s]
                _rhs(kind, a, b, y[0], y[1], y[2], y[3], y[4], y[5], grad, k1)
                _rhs(kind, a, b, y[0] + hh * k1[0], y[1] + hh * k1[1],
                     y[2] + hh * k1[2], y[3] + hh * k1[3],
                     y[4] + hh * k1[4], y[5] + hh * k1[5], grad, k2)
                _rhs(kind, a, b, y[0] + hh * k2[0], y[1] + hh * k2[1],
                     y[2] + hh * k2[2], y[3] + hh * k2[3],
                     y[4] + hh * k2[4], y[5] + hh * k2[5], grad, k3)
                _rhs(kind, a, b, y[0] + h * k3[0], y[1] + h * k3[1],
                     y[2] + h * k3[2], y[3] + h * k3[3],
                     y[4] + h * k3[4], y[5] + h * k3[5], grad, k4)
                for c in range(2):
                    y[c] = y[c] + w * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
                    y[c] = y[c] - floor(y[c])
                    if y[c] >= 1.0:
                        y[c] = 0.0
                if grad:
                    for c in range(2, 6):
                        y[c] = y[c] + w * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
            x1[t] = y[0]
            x2[t] = y[1]
            if grad:
                for c in range(4):
                    gv[t, c] = y[2 + c]


def greedy_pack(p1, p2, double sep):
    cdef const double[::1] a = np.ascontiguousarray(p1, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(p2, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    mind_arr = np.full(n, INFINITY)
    cdef double[::1] mind = mind_arr
    cdef double sep2 = sep * sep
    cdef Py_ssize_t c = 0
    cdef Py_ssize_t i, best
    cdef double dx, dy, d, ac, bc, top
    chosen = [0]
    while True:
        ac = a[c]
        bc = b[c]
        best = 0
        top = -1.0
        with nogil:
            # update pass first so the compiler can vectorize it
            for i in range(n):
                dx = fabs(a[i] - ac)
                dy = fabs(b[i] - bc)
                dx = dx if dx <= 1.0 - dx else 1.0 - dx
                dy = dy if dy <= 1.0 - dy else 1.0 - dy
                d = dx * dx + dy * dy
                mind[i] = d if d < mind[i] else mind[i]
            for i in range(n):
                if mind[i] > top:
                    top = mind[i]
                    best = i
        c = best
        if not top > sep2:
            break
        chosen.append(c)
    return np.asarray(chosen, dtype=np.int64)
