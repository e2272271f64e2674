# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Must stay numerically interchangeable with _pykernels."""

from libc.math cimport fabs, pow

import numpy as np


def max_sign_sum(double[:, ::1] a):
    """max over zeta in {-1,1}^n of sum_j |sum_k a[j, k] zeta_k|.

    Gray-code walk over the first n-1 signs; the last sign is pinned to +1
    because zeta and -zeta give the same value.
    """
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    cdef Py_ssize_t j, k, bit
    cdef unsigned long long g, steps
    cdef double s, best, sgn
    if m == 0 or n == 0:
        return 0.0
    cdef double[::1] r = np.empty(m, dtype=np.float64)
    cdef double[::1] zeta = np.ones(n, dtype=np.float64)
    for j in range(m):
        s = 0.0
        for k in range(n):
            s += a[j, k]
        r[j] = s
    best = 0.0
    for j in range(m):
        best += fabs(r[j])
    steps = (<unsigned long long>1) << (n - 1)
    for g in range(1, steps):
        bit = 0
        while not (g >> bit) & 1:
            bit += 1
        zeta[bit] = -zeta[bit]
        sgn = 2.0 * zeta[bit]
        s = 0.0
        for j in range(m):
            r[j] += sgn * a[j, bit]
            s += fabs(r[j])
        if s > best:
            best = s
    return best


def calderon(double[::1] c, long[::1] labels, double lam):
    """Omega(c)_j = sum_k min(1, lam**(j - k)) c_k over the given integer labels."""
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t i, k
    cdef long d
    cdef double acc
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        acc = 0.0
        for k in range(n):
            d = labels[i] - labels[k]
            if d >= 0:
                acc += c[k]
            else:
                acc += pow(lam, <double>d) * c[k]
        o[i] = acc
    return out
