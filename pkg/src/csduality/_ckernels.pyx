# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Semantics must match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs, cos, sin, INFINITY

cnp.import_array()


cdef inline void _neumaier_add(double *s, double *c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def neumaier_sum(const double[::1] x):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double s = 0.0, c = 0.0
    with nogil:
        for i in range(n):
            _neumaier_add(&s, &c, x[i])
    return s + c


def cumulative_log(const double[::1] values):
    cdef Py_ssize_t i, n = values.shape[0]
    out = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] o = out
    o[0] = 0.0
    with nogil:
        for i in range(n):
            o[i + 1] = o[i] + log(values[i])
    return out


def log_series_rows(const double[:, ::1] log_terms):
    cdef Py_ssize_t r, k, nr = log_terms.shape[0], nk = log_terms.shape[1]
    cdef double m, s, c, t
    out = np.empty(nr, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for r in range(nr):
            m = -INFINITY
            for k in range(nk):
                t = log_terms[r, k]
                if t > m:
                    m = t
            if m == -INFINITY:
                o[r] = -INFINITY
                continue
            s = 0.0
            c = 0.0
            for k in range(nk):
                t = log_terms[r, k]
                if t != -INFINITY:
                    _neumaier_add(&s, &c, exp(t - m))
            o[r] = m + log(s + c)
    return out


def complex_series_rows(const double[:, ::1] log_mag, const double[:, ::1] phase):
    cdef Py_ssize_t r, k, nr = log_mag.shape[0], nk = log_mag.shape[1]
    cdef double m, sr, cr, si, ci, t, a
    out = np.empty(nr, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for r in range(nr):
            m = -INFINITY
            for k in range(nk):
                if log_mag[r, k] > m:
                    m = log_mag[r, k]
            if m == -INFINITY:
                o[r] = 0.0
                continue
            sr = 0.0
            cr = 0.0
            si = 0.0
            ci = 0.0
            for k in range(nk):
                t = log_mag[r, k]
                if t != -INFINITY:
                    a = exp(t - m)
                    _neumaier_add(&sr, &cr, a * cos(phase[r, k]))
                    _neumaier_add(&si, &ci, a * sin(phase[r, k]))
            a = exp(m)
            o[r] = a * (sr + cr) + 1j * (a * (si + ci))
    return out


def batch_conjugate(const double complex[:, :, ::1] U, const double complex[:, ::1] w):
    cdef Py_ssize_t s, i, j, k
    cdef Py_ssize_t ns = U.shape[0], M = U.shape[1]
    cdef double complex acc
    out = np.empty((ns, M, M), dtype=np.complex128)
    cdef double complex[:, :, ::1] o = out
    with nogil:
        for s in range(ns):
            for i in range(M):
                for k in range(M):
                    acc = 0.0
                    for j in range(M):
                        acc = acc + U[s, i, j] * w[s, j] * U[s, k, j].conjugate()
                    o[s, i, k] = acc
    return out
