# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled squared-exponential kernel + forward-substitution kernels."""

from libc.math cimport exp


def posterior_solve(const double[:, ::1] L, const double[:, ::1] X,
                    const double[::1] w, Py_ssize_t m,
                    const double[::1] x, const double[::1] inv_ls,
                    double s2, double[::1] v):
    """Fill ``v[:m] = L^{-1} k(X, x)`` and return ``(v . w, v . v)``."""
    cdef Py_ssize_t i, j, d
    cdef Py_ssize_t dim = X.shape[1]
    cdef double r2, diff, acc, vi
    cdef double vw = 0.0
    cdef double vv = 0.0
    for i in range(m):
        r2 = 0.0
        for d in range(dim):
            diff = (X[i, d] - x[d]) * inv_ls[d]
            r2 += diff * diff
        acc = s2 * exp(-0.5 * r2)
        for j in range(i):
            acc -= L[i, j] * v[j]
        vi = acc / L[i, i]
        v[i] = vi
        vw += vi * w[i]
        vv += vi * vi
    return vw, vv


def kernel_vector(const double[:, ::1] X, Py_ssize_t m, const double[::1] x,
                  const double[::1] inv_ls, double s2, double[::1] out):
    cdef Py_ssize_t i, d
    cdef Py_ssize_t dim = X.shape[1]
    cdef double r2, diff
    for i in range(m):
        r2 = 0.0
        for d in range(dim):
            diff = (X[i, d] - x[d]) * inv_ls[d]
            r2 += diff * diff
        out[i] = s2 * exp(-0.5 * r2)
