# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Gram accumulation, Cholesky factor/solve, kernel
matrices, dense products, and Poisson CDF inversion.

Signatures and semantics mirror ``_kernels_py`` exactly; the backend module
picks one of the two at import time.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

NAME = "compiled"


def gram(double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0], p = x.shape[1]
    out_arr = np.zeros((p, p), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, l
    cdef double xij
    for i in range(n):
        for j in range(p):
            xij = x[i, j]
            for l in range(j, p):
                out[j, l] += xij * x[i, l]
    for j in range(p):
        for l in range(j + 1, p):
            out[l, j] = out[j, l]
    return out_arr


def crossprod(double[:, ::1] x, double[:, ::1] t):
    cdef Py_ssize_t n = x.shape[0], p = x.shape[1], m = t.shape[1]
    out_arr = np.zeros((p, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, c
    cdef double xij
    for i in range(n):
        for j in range(p):
            xij = x[i, j]
            for c in range(m):
                out[j, c] += xij * t[i, c]
    return out_arr


def matmul(double[:, ::1] a, double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], k = a.shape[1], m = b.shape[1]
    out_arr = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, l, j
    cdef double ail
    for i in range(n):
        for l in range(k):
            ail = a[i, l]
            if ail != 0.0:
                for j in range(m):
                    out[i, j] += ail * b[l, j]
    return out_arr


def cholesky(double[:, ::1] a):
    cdef Py_ssize_t n = a.shape[0]
    out_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] L = out_arr
    cdef Py_ssize_t i, j, k
    cdef double s, piv
    for j in range(n):
        s = a[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        # reject non-positive pivots and NaN
        if not (s > 0.0):
            raise np.linalg.LinAlgError("matrix is not positive definite")
        piv = sqrt(s)
        L[j, j] = piv
        for i in range(j + 1, n):
            s = a[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / piv
    return out_arr


def solve_cholesky(double[:, ::1] factor, b):
    y_arr = np.array(b, dtype=np.float64, order="C", copy=True)
    if y_arr.ndim == 1:
        y_arr = y_arr[:, None]
    cdef double[:, ::1] y = y_arr
    cdef double[:, ::1] L = factor
    cdef Py_ssize_t n = L.shape[0], m = y.shape[1]
    cdef Py_ssize_t i, k, c
    cdef double lik
    for i in range(n):
        for k in range(i):
            lik = L[i, k]
            if lik != 0.0:
                for c in range(m):
                    y[i, c] -= lik * y[k, c]
        for c in range(m):
            y[i, c] /= L[i, i]
    for i in range(n - 1, -1, -1):
        for k in range(i + 1, n):
            lik = L[k, i]
            if lik != 0.0:
                for c in range(m):
                    y[i, c] -= lik * y[k, c]
        for c in range(m):
            y[i, c] /= L[i, i]
    return y_arr


def rbf_matrix(double[:, ::1] a, double[:, ::1] b, double length_scale, double signal_var):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], p = a.shape[1]
    out_arr = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double inv = 0.5 / (length_scale * length_scale)
    cdef Py_ssize_t i, j, c
    cdef double d, ssq
    for i in range(na):
        for j in range(nb):
            ssq = 0.0
            for c in range(p):
                d = a[i, c] - b[j, c]
                ssq += d * d
            out[i, j] = signal_var * exp(-ssq * inv)
    return out_arr


def rbf_matrix_sym(double[:, ::1] a, double length_scale, double signal_var):
    cdef Py_ssize_t n = a.shape[0], p = a.shape[1]
    out_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double inv = 0.5 / (length_scale * length_scale)
    cdef Py_ssize_t i, j, c
    cdef double d, ssq
    for i in range(n):
        out[i, i] = signal_var
        for j in range(i + 1, n):
            ssq = 0.0
            for c in range(p):
                d = a[i, c] - a[j, c]
                ssq += d * d
            out[i, j] = signal_var * exp(-ssq * inv)
            out[j, i] = out[i, j]
    return out_arr


def poisson_inversion(double[::1] lam, double[::1] u):
    cdef Py_ssize_t n = lam.shape[0]
    out_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double lm, uu, p, f
    cdef long long k
    for i in range(n):
        lm = lam[i]
        uu = u[i]
        p = exp(-lm)
        f = p
        k = 0
        while uu > f:
            k += 1
            p *= lm / k
            f += p
            if p <= 0.0:
                break
        out[i] = k
    return out_arr
