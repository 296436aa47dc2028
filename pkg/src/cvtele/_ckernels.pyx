# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice kernels (same contracts as ``_pykernels``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()


cdef void _fill(double complex alpha, int dim, double[:, ::1] F,
                double complex[:, ::1] out) noexcept nogil:
    cdef double x = alpha.real * alpha.real + alpha.imag * alpha.imag
    cdef double env = exp(-0.5 * x)
    cdef double complex g = 1.0
    cdef double complex gc
    cdef double sign = 1.0
    cdef int k, n
    for k in range(dim):
        if k > 0:
            g = g * alpha / sqrt(<double>k)
            sign = -sign
        F[k, 0] = 1.0
        if dim - k > 1:
            F[k, 1] = (1.0 + k - x) / sqrt(k + 1.0)
        for n in range(1, dim - k - 1):
            F[k, n + 1] = ((2.0 * n + 1.0 + k - x) * F[k, n]
                           - sqrt(<double>n * (n + k)) * F[k, n - 1]) / sqrt((n + 1.0) * (n + k + 1.0))
        gc = sign * (g.real - 1j * g.imag)
        for n in range(dim - k):
            out[n + k, n] = env * g * F[k, n]
            if k > 0:
                out[n, n + k] = env * gc * F[k, n]


def displacement_batch(alphas, int dim):
    cdef const double complex[::1] a = np.ascontiguousarray(alphas, dtype=complex).ravel()
    cdef Py_ssize_t K = a.shape[0], i
    result = np.empty((K, dim, dim), dtype=complex)
    cdef double complex[:, :, ::1] out = result
    cdef double[:, ::1] F = np.zeros((dim, dim))
    with nogil:
        for i in range(K):
            _fill(a[i], dim, F, out[i])
    return result


def cf_trace_batch(rho, alphas):
    cdef const double complex[:, ::1] r = np.ascontiguousarray(rho, dtype=complex)
    cdef const double complex[::1] a = np.ascontiguousarray(alphas, dtype=complex).ravel()
    cdef int dim = r.shape[0]
    cdef Py_ssize_t K = a.shape[0], i
    cdef int m, n
    cdef double complex acc
    result = np.empty(K, dtype=complex)
    cdef double complex[::1] out = result
    cdef double[:, ::1] F = np.zeros((dim, dim))
    cdef double complex[:, ::1] D = np.empty((dim, dim), dtype=complex)
    with nogil:
        for i in range(K):
            _fill(a[i], dim, F, D)
            acc = 0.0
            for m in range(dim):
                for n in range(dim):
                    acc = acc + r[n, m] * D[m, n]
            out[i] = acc
    return result


def weyl_sum(alphas, weights, int dim):
    """Kahan-compensated accumulation of ``weights[k] * D(alphas[k])``."""
    cdef const double complex[::1] a = np.ascontiguousarray(alphas, dtype=complex).ravel()
    cdef const double complex[::1] w = np.ascontiguousarray(weights, dtype=complex).ravel()
    cdef Py_ssize_t K = a.shape[0], i
    cdef int m, n
    cdef double complex y, t
    result = np.zeros((dim, dim), dtype=complex)
    cdef double complex[:, ::1] s = result
    cdef double complex[:, ::1] c = np.zeros((dim, dim), dtype=complex)
    cdef double[:, ::1] F = np.zeros((dim, dim))
    cdef double complex[:, ::1] D = np.empty((dim, dim), dtype=complex)
    with nogil:
        for i in range(K):
            _fill(a[i], dim, F, D)
            for m in range(dim):
                for n in range(dim):
                    y = w[i] * D[m, n] - c[m, n]
                    t = s[m, n] + y
                    c[m, n] = (t - s[m, n]) - y
                    s[m, n] = t
    return result
