# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled shrinkage kernels.

Single-pass fused loops; avoids the temporaries of the NumPy fallback.
Semantics must match ``ggmlab._kernels._numpy`` exactly.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def soft_threshold(double[:, ::1] z, double t):
    cdef Py_ssize_t m = z.shape[0], n = z.shape[1], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((m, n))
    cdef double[:, ::1] out = out_arr
    cdef double v
    for i in range(m):
        for j in range(n):
            v = z[i, j]
            if v > t:
                out[i, j] = v - t
            elif v < -t:
                out[i, j] = v + t
            else:
                out[i, j] = 0.0
    return out_arr


def group_row_shrink(double[:, ::1] z, double t):
    cdef Py_ssize_t m = z.shape[0], n = z.shape[1], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((m, n))
    cdef double[:, ::1] out = out_arr
    cdef double acc, norm, scale
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc += z[i, j] * z[i, j]
        norm = sqrt(acc)
        scale = 0.0
        if norm > 0.0 and t < norm:
            scale = 1.0 - t / norm
        for j in range(n):
            out[i, j] = scale * z[i, j]
    return out_arr


def weighted_row_shrink(double[:, ::1] z, double beta_xi, double[::1] diag_theta):
    cdef Py_ssize_t m = z.shape[0], n = z.shape[1], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((m, n))
    cdef double[:, ::1] out = out_arr
    cdef double acc, norm, scale, t
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc += z[i, j] * z[i, j]
        norm = sqrt(acc)
        t = beta_xi * diag_theta[i]
        scale = 0.0
        if norm > 0.0 and t < norm:
            scale = 1.0 - t / norm
        for j in range(n):
            out[i, j] = scale * z[i, j]
    return out_arr
