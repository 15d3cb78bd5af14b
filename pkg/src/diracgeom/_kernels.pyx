# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Batched residual kernels over many sample points (small dense matrices)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef void _matmul(const double[:, :] X, const double[:, :] Y, double[:, :] out, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double s
    for i in range(d):
        for j in range(d):
            s = 0.0
            for k in range(d):
                s = s + X[i, k] * Y[k, j]
            out[i, j] = s


def structure_residuals(const double[:, :, :] A, const double[:, :, :] Ai, const double[:, :] B, const double[:, :] Binv):
    """Frobenius residuals of the six structure identities for each Ad in the batch.

    Column order: 4 sv s + rv r - 4, 4 s sv + (r rv)^T - 4, s^T r + r^T s,
    s rv + rv^T s^T, rv sv^T + sv rv^T, r sv + (r sv)^T.
    """
    cdef Py_ssize_t n = A.shape[0], d = A.shape[1]
    cdef Py_ssize_t p, i, j, c
    out = np.zeros((n, 6))
    cdef double[:, :] res = out
    cdef double[:, :] s = np.empty((d, d)), sv = np.empty((d, d))
    cdef double[:, :] r = np.empty((d, d)), rv = np.empty((d, d))
    cdef double[:, :] T = np.empty((d, d)), U = np.empty((d, d))
    cdef double[:, :] P1 = np.empty((d, d)), P2 = np.empty((d, d))
    cdef double acc[6]
    cdef double e, x
    with nogil:
        for p in range(n):
            for i in range(d):
                for j in range(d):
                    e = 1.0 if i == j else 0.0
                    r[i, j] = e - A[p, i, j]
                    rv[i, j] = e - Ai[p, i, j]
                    T[i, j] = e + A[p, i, j]
                    U[i, j] = e + Ai[p, i, j]
            _matmul(B, T, s, d)
            _matmul(U, Binv, sv, d)
            for i in range(d):
                for j in range(d):
                    s[i, j] = 0.5 * s[i, j]
                    sv[i, j] = 0.5 * sv[i, j]
            for c in range(6):
                acc[c] = 0.0
            # 1: 4 sv s + rv r - 4
            _matmul(sv, s, P1, d)
            _matmul(rv, r, P2, d)
            for i in range(d):
                for j in range(d):
                    x = 4.0 * P1[i, j] + P2[i, j] - (4.0 if i == j else 0.0)
                    acc[0] += x * x
            # 2: 4 s sv + (r rv)^T - 4
            _matmul(s, sv, P1, d)
            _matmul(r, rv, P2, d)
            for i in range(d):
                for j in range(d):
                    x = 4.0 * P1[i, j] + P2[j, i] - (4.0 if i == j else 0.0)
                    acc[1] += x * x
            # 3: s^T r + r^T s
            for i in range(d):
                for j in range(d):
                    x = 0.0
                    for c in range(d):
                        x = x + s[c, i] * r[c, j] + r[c, i] * s[c, j]
                    acc[2] += x * x
            # 4: s rv + rv^T s^T
            _matmul(s, rv, P1, d)
            for i in range(d):
                for j in range(d):
                    x = P1[i, j] + P1[j, i]
                    acc[3] += x * x
            # 5: rv sv^T + sv rv^T
            for i in range(d):
                for j in range(d):
                    x = 0.0
                    for c in range(d):
                        x = x + rv[i, c] * sv[j, c] + sv[i, c] * rv[j, c]
                    acc[4] += x * x
            # 6: r sv + (r sv)^T
            _matmul(r, sv, P1, d)
            for i in range(d):
                for j in range(d):
                    x = P1[i, j] + P1[j, i]
                    acc[5] += x * x
            for c in range(6):
                res[p, c] = sqrt(acc[c])
    return out


def isotropy_residuals(const double[:, :, :] M):
    """max |<m_i, m_j>| for the split pairing, for each 2n x k basis in the batch."""
    cdef Py_ssize_t N = M.shape[0], two_n = M.shape[1], k = M.shape[2]
    cdef Py_ssize_t n = two_n // 2
    cdef Py_ssize_t p, i, j, a
    cdef double x, worst
    out = np.zeros(N)
    cdef double[:] res = out
    with nogil:
        for p in range(N):
            worst = 0.0
            for i in range(k):
                for j in range(i, k):
                    x = 0.0
                    for a in range(n):
                        x = x + M[p, a, i] * M[p, n + a, j] + M[p, n + a, i] * M[p, a, j]
                    if fabs(x) > worst:
                        worst = fabs(x)
            res[p] = worst
    return out
