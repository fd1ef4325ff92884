# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Two kernels live here: the modified Gram-Schmidt span accumulator used by
:func:`convexdecomp.vecspace.accumulate_span`, and batched value/gradient
evaluation of sums of scalar kernels composed with affine maps.  The pure
Python twins in :mod:`convexdecomp._kernels_py` define the reference
behaviour.
"""
import numpy as np

from libc.math cimport sqrt, exp, fabs

# kernel codes, shared with _kernels_py
cdef enum:
    RELU_SQUARE = 0
    SQUARE = 1
    ABS = 2
    EXP = 3

cdef double EXP_LIMIT = 700.0


def mgs_accumulate(double[:, ::1] basis, Py_ssize_t k, const double[:, ::1] cands, double tol):
    """Append the independent part of each candidate row to ``basis[:k]``.

    Rows are processed in order with modified Gram-Schmidt and one
    reorthogonalization pass.  ``basis`` is modified in place; the new row
    count is returned.
    """
    cdef Py_ssize_t n = basis.shape[1]
    cdef Py_ssize_t cap = basis.shape[0]
    cdef Py_ssize_t m = cands.shape[0]
    cdef double[::1] r = np.empty(n)
    cdef Py_ssize_t i, j, l, p
    cdef double d, nrm, cnorm, scale
    for i in range(m):
        cnorm = 0.0
        for l in range(n):
            r[l] = cands[i, l]
            cnorm += r[l] * r[l]
        cnorm = sqrt(cnorm)
        for p in range(2):
            for j in range(k):
                d = 0.0
                for l in range(n):
                    d += basis[j, l] * r[l]
                for l in range(n):
                    r[l] -= d * basis[j, l]
        nrm = 0.0
        for l in range(n):
            nrm += r[l] * r[l]
        nrm = sqrt(nrm)
        scale = cnorm if cnorm > 1.0 else 1.0
        if nrm <= tol * scale or k >= cap:
            continue
        for l in range(n):
            basis[k, l] = r[l] / nrm
        k += 1
    return k


def composite_values(const double[:, ::1] X, const double[:, ::1] A, const double[::1] s,
                     const double[::1] w, const int[::1] kinds, double[::1] out):
    """out[i] = sum_j w[j] * kernel_j(<A[j], X[i]> - s[j]).

    Returns -1 on success, otherwise the row index whose exponential
    argument exceeded the overflow limit.
    """
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1], T = A.shape[0]
    cdef Py_ssize_t i, j, l
    cdef double t, acc, kv
    for i in range(m):
        acc = 0.0
        for j in range(T):
            t = 0.0
            for l in range(n):
                t += A[j, l] * X[i, l]
            t -= s[j]
            if kinds[j] == RELU_SQUARE:
                kv = t * t if t > 0.0 else 0.0
            elif kinds[j] == SQUARE:
                kv = t * t
            elif kinds[j] == ABS:
                kv = fabs(t)
            else:
                if t > EXP_LIMIT:
                    return i
                kv = exp(t)
            acc += w[j] * kv
        out[i] = acc
    return -1


def composite_gradients(const double[:, ::1] X, const double[:, ::1] A, const double[::1] s,
                        const double[::1] w, const int[::1] kinds, double[:, ::1] out):
    """Chosen subgradient of the composite at every row of ``X``.

    Kink conventions: ReluSquare and Abs both take derivative 0 at t = 0.
    Same return protocol as :func:`composite_values`.
    """
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1], T = A.shape[0]
    cdef Py_ssize_t i, j, l
    cdef double t, dk
    for i in range(m):
        for l in range(n):
            out[i, l] = 0.0
        for j in range(T):
            t = 0.0
            for l in range(n):
                t += A[j, l] * X[i, l]
            t -= s[j]
            if kinds[j] == RELU_SQUARE:
                dk = 2.0 * t if t > 0.0 else 0.0
            elif kinds[j] == SQUARE:
                dk = 2.0 * t
            elif kinds[j] == ABS:
                dk = 1.0 if t > 0.0 else (-1.0 if t < 0.0 else 0.0)
            else:
                if t > EXP_LIMIT:
                    return i
                dk = exp(t)
            dk *= w[j]
            if dk != 0.0:
                for l in range(n):
                    out[i, l] += dk * A[j, l]
    return -1
