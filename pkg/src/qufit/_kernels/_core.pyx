# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels; same contract as ``core_py``."""

from libc.math cimport cos, sin, log, INFINITY

import numpy as np


cdef inline void _rotation(double alpha, double theta, double phi, double* K) nogil:
    # K_ij = cos(2a) d_ij - sin(2a) eps_ijk n_k + 2 sin^2(a) n_i n_j, row-major
    cdef double st = sin(theta)
    cdef double n0 = st * cos(phi)
    cdef double n1 = st * sin(phi)
    cdef double n2 = cos(theta)
    cdef double c2a = cos(2.0 * alpha)
    cdef double s2a = sin(2.0 * alpha)
    cdef double sa = sin(alpha)
    cdef double w = 2.0 * sa * sa
    K[0] = c2a + w * n0 * n0
    K[1] = -s2a * n2 + w * n0 * n1
    K[2] = s2a * n1 + w * n0 * n2
    K[3] = s2a * n2 + w * n1 * n0
    K[4] = c2a + w * n1 * n1
    K[5] = -s2a * n0 + w * n1 * n2
    K[6] = -s2a * n1 + w * n2 * n0
    K[7] = s2a * n0 + w * n2 * n1
    K[8] = c2a + w * n2 * n2


def heisenberg_rotation_batch(points):
    points = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] pts = points
    cdef Py_ssize_t m = pts.shape[0], r
    out = np.empty((m, 3, 3), dtype=np.float64)
    cdef double[:, :, ::1] K = out
    for r in range(m):
        _rotation(pts[r, 0], pts[r, 1], pts[r, 2], &K[r, 0, 0])
    return out


def singlet_probabilities_batch(points, traces, correlators):
    points = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    traces = np.ascontiguousarray(traces, dtype=np.float64)
    correlators = np.ascontiguousarray(correlators, dtype=np.float64)
    cdef const double[:, ::1] pts = points
    cdef const double[::1] t = traces
    cdef const double[:, :, ::1] G = correlators
    cdef Py_ssize_t m = pts.shape[0], n = t.shape[0], r, x, i, j
    cdef double K[9]
    cdef double acc
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] p = out
    for r in range(m):
        _rotation(pts[r, 0], pts[r, 1], pts[r, 2], K)
        for x in range(n):
            acc = 0.0
            for i in range(3):
                for j in range(3):
                    acc += K[3 * i + j] * G[x, j, i]
            p[r, x] = 0.25 * (t[x] - acc)
    return out


def singlet_nll_batch(points, counts, traces, correlators):
    points = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    counts = np.ascontiguousarray(counts, dtype=np.float64)
    traces = np.ascontiguousarray(traces, dtype=np.float64)
    correlators = np.ascontiguousarray(correlators, dtype=np.float64)
    cdef const double[:, ::1] pts = points
    cdef const double[::1] c = counts
    cdef const double[::1] t = traces
    cdef const double[:, :, ::1] G = correlators
    cdef Py_ssize_t m = pts.shape[0], n = t.shape[0], r, x, i, j
    cdef double K[9]
    cdef double acc, prob, total
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] nll = out
    for r in range(m):
        _rotation(pts[r, 0], pts[r, 1], pts[r, 2], K)
        total = 0.0
        for x in range(n):
            if c[x] <= 0.0:
                continue
            acc = 0.0
            for i in range(3):
                for j in range(3):
                    acc += K[3 * i + j] * G[x, j, i]
            prob = 0.25 * (t[x] - acc)
            if prob < 1e-300:
                total = INFINITY
                break
            total -= c[x] * log(prob)
        nll[r] = total
    return out
