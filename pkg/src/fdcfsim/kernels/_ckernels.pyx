# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot small-matrix kernels.

Same contracts as _pykernels: Cholesky-based Hermitian solves sized for the
simulator's per-AP/per-UE systems (n of a few), where call overhead and
LAPACK setup dominate the pure-Python path.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "cython"


cdef int _chol_factor(double complex[:, ::1] a, Py_ssize_t n) noexcept nogil:
    """In-place lower-triangular Cholesky; returns -1 when not PD."""
    cdef Py_ssize_t i, j, k
    cdef double complex s
    cdef double d
    for j in range(n):
        d = a[j, j].real
        for k in range(j):
            s = a[j, k]
            d -= s.real * s.real + s.imag * s.imag
        if not d > 0.0:  # catches non-PD and NaN
            return -1
        d = sqrt(d)
        a[j, j] = d
        for i in range(j + 1, n):
            s = a[i, j]
            for k in range(j):
                s -= a[i, k] * a[j, k].conjugate()
            a[i, j] = s / d
    return 0


cdef void _chol_solve_cols(double complex[:, ::1] low, double complex[:, ::1] x,
                           Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    """Solve L L^H X = B in place for every column of x."""
    cdef Py_ssize_t i, k, c
    cdef double complex s
    for c in range(m):
        for i in range(n):
            s = x[i, c]
            for k in range(i):
                s -= low[i, k] * x[k, c]
            x[i, c] = s / low[i, i]
        for i in range(n - 1, -1, -1):
            s = x[i, c]
            for k in range(i + 1, n):
                s -= low[k, i].conjugate() * x[k, c]
            x[i, c] = s / low[i, i]


def cholesky_solve(a, b):
    """Solve A X = B for Hermitian positive-definite A via Cholesky.

    a: (n, n) complex; b: (n,) or (n, m). Raises np.linalg.LinAlgError when
    the factorization fails (A not positive definite / singular).
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] aw = np.array(a, dtype=np.complex128, order="C")
    one_d = np.ndim(b) == 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] xw
    if one_d:
        xw = np.array(b, dtype=np.complex128, order="C").reshape(-1, 1)
    else:
        xw = np.array(b, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = aw.shape[0]
    if aw.shape[1] != n or xw.shape[0] != n:
        raise ValueError("dimension mismatch")
    if _chol_factor(aw, n) != 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    _chol_solve_cols(aw, xw, n, xw.shape[1])
    return xw[:, 0] if one_d else xw


def shifted_solve(a, b, double shift):
    """Solve (A + shift*I) X = B."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] aw = np.array(a, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = aw.shape[0]
    cdef Py_ssize_t i
    for i in range(n):
        aw[i, i] = aw[i, i] + shift
    return cholesky_solve(aw, b)


def shifted_power(a, b, double shift):
    """Return ||(A + shift*I)^-1 B||_F^2."""
    x = shifted_solve(a, b, shift)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] xv = x.reshape(x.shape[0], -1)
    cdef double acc = 0.0
    cdef Py_ssize_t i, j
    cdef double complex z
    for i in range(xv.shape[0]):
        for j in range(xv.shape[1]):
            z = xv[i, j]
            acc += z.real * z.real + z.imag * z.imag
    return acc
