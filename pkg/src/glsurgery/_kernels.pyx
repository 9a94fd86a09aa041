# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled scalar-curvature kernels; same signatures as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def _flat(x, shape):
    return np.ascontiguousarray(np.broadcast_to(np.asarray(x, dtype=np.float64), shape)).ravel()


def single_warped(f, f1, f2, int n):
    shape = np.broadcast_shapes(np.shape(f), np.shape(f1), np.shape(f2))
    cdef const double[::1] F = _flat(f, shape), D1 = _flat(f1, shape), D2 = _flat(f2, shape)
    out = np.empty(F.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double x
    for i in range(F.shape[0]):
        x = F[i]
        o[i] = (n - 1) * ((n - 2) * (1.0 - D1[i] * D1[i]) / (x * x) - 2.0 * D2[i] / x)
    return out.reshape(shape)


def doubly_warped(u, u1, u2, v, v1, v2, int p, int q):
    shape = np.broadcast_shapes(*(np.shape(x) for x in (u, u1, u2, v, v1, v2)))
    cdef const double[::1] U = _flat(u, shape), U1 = _flat(u1, shape), U2 = _flat(u2, shape)
    cdef const double[::1] V = _flat(v, shape), V1 = _flat(v1, shape), V2 = _flat(v2, shape)
    out = np.empty(U.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double a, b, r
    for i in range(U.shape[0]):
        a = U[i]
        b = V[i]
        r = -2.0 * p * U2[i] / a - 2.0 * q * V2[i] / b - 2.0 * p * q * U1[i] * V1[i] / (a * b)
        if p > 1:
            r += p * (p - 1) * (1.0 - U1[i] * U1[i]) / (a * a)
        if q > 1:
            r += q * (q - 1) * (1.0 - V1[i] * V1[i]) / (b * b)
        o[i] = r
    return out.reshape(shape)


def eq21(a, ar, at, arr, F, Fr, Ft, Frr, Ftt, int n):
    shape = np.broadcast_shapes(*(np.shape(x) for x in (a, ar, at, arr, F, Fr, Ft, Frr, Ftt)))
    cdef const double[::1] A = _flat(a, shape), AR = _flat(ar, shape), AT = _flat(at, shape)
    cdef const double[::1] ARR = _flat(arr, shape), G = _flat(F, shape), GR = _flat(Fr, shape)
    cdef const double[::1] GT = _flat(Ft, shape), GRR = _flat(Frr, shape), GTT = _flat(Ftt, shape)
    out = np.empty(A.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double x, y, x2
    for i in range(A.shape[0]):
        x = A[i]
        y = G[i]
        x2 = x * x
        o[i] = (n * (n - 1) / (y * y) * (1.0 - GR[i] * GR[i] - GT[i] * GT[i] / x2)
                - 2.0 * n / y * (GRR[i] + GR[i] * AR[i] / x)
                + 2.0 * n / (x2 * y) * (-GTT[i] + GT[i] * AT[i] / x)
                - 2.0 * ARR[i] / x)
    return out.reshape(shape)


def eq22(a, ar, arr, f, fr, frr, int n):
    shape = np.broadcast_shapes(*(np.shape(x) for x in (a, ar, arr, f, fr, frr)))
    cdef const double[::1] A = _flat(a, shape), AR = _flat(ar, shape), ARR = _flat(arr, shape)
    cdef const double[::1] G = _flat(f, shape), GR = _flat(fr, shape), GRR = _flat(frr, shape)
    out = np.empty(A.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double x, y
    for i in range(A.shape[0]):
        x = A[i]
        y = G[i]
        o[i] = (n * (n - 1) / (y * y) * (1.0 - GR[i] * GR[i])
                - 2.0 * n / y * (GRR[i] + GR[i] * AR[i] / x)
                - 2.0 * ARR[i] / x)
    return out.reshape(shape)
