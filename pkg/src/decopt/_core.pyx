# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Each function has a drop-in twin in ``decopt._fallback``; ``decopt.kernels``
picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, hypot, copysign

cnp.import_array()

DEF MAX_QL_ITER = 60
cdef double EPS = 2.220446049250313e-16


def householder_tridiagonal(a):
    """Reduce a symmetric matrix to tridiagonal form.

    Returns ``(diag, offdiag)`` of a tridiagonal matrix orthogonally similar
    to ``a``. The input is not modified.
    """
    cdef double[:, ::1] A = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    cdef double[::1] u = np.zeros(n)
    cdef double[::1] p = np.zeros(n)
    cdef double[::1] diag = np.zeros(n)
    cdef double[::1] off = np.zeros(max(n - 1, 0))
    cdef Py_ssize_t k, i, j
    cdef double alpha, norm2, h, kk, tmp

    for k in range(n - 2):
        norm2 = 0.0
        for i in range(k + 1, n):
            norm2 += A[i, k] * A[i, k]
        if norm2 == 0.0:
            off[k] = 0.0
            continue
        alpha = sqrt(norm2)
        if A[k + 1, k] < 0.0:
            alpha = -alpha
        # u = x + alpha e1, H = I - u u^T / h with h = u^T u / 2
        for i in range(k + 1, n):
            u[i] = A[i, k]
        u[k + 1] += alpha
        h = norm2 + alpha * A[k + 1, k]
        # p = A u / h over the trailing block
        for i in range(k + 1, n):
            tmp = 0.0
            for j in range(k + 1, n):
                tmp += A[i, j] * u[j]
            p[i] = tmp / h
        kk = 0.0
        for i in range(k + 1, n):
            kk += u[i] * p[i]
        kk /= 2.0 * h
        for i in range(k + 1, n):
            p[i] -= kk * u[i]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i, j] -= u[i] * p[j] + p[i] * u[j]
        off[k] = -alpha
    for i in range(n):
        diag[i] = A[i, i]
    if n >= 2:
        off[n - 2] = A[n - 1, n - 2]
    return np.asarray(diag), np.asarray(off)


def tridiagonal_eigenvalues(diag, offdiag):
    """Eigenvalues of a symmetric tridiagonal matrix (implicit QL, Wilkinson shift).

    Returned unsorted.
    """
    cdef double[::1] d = np.array(diag, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = d.shape[0]
    cdef double[::1] e = np.zeros(n)
    cdef Py_ssize_t i, l, mm
    cdef int it
    cdef double g, r, s, c, p, f, b, dd
    cdef const double[::1] src = np.asarray(offdiag, dtype=np.float64)
    for i in range(n - 1):
        e[i] = src[i]

    for l in range(n):
        it = 0
        while True:
            mm = l
            while mm < n - 1:
                dd = fabs(d[mm]) + fabs(d[mm + 1])
                if fabs(e[mm]) <= EPS * dd:
                    break
                mm += 1
            if mm == l:
                break
            it += 1
            if it > MAX_QL_ITER:
                raise ArithmeticError("tridiagonal QL failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[mm] - d[l] + e[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = mm - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[mm] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            else:
                d[l] -= p
                e[l] = g
                e[mm] = 0.0
                continue
            # r == 0: deflated early, retry this l
    return np.asarray(d)


def fastmix_recurrence(w, x0, Py_ssize_t K, double eta):
    """Two-term accelerated gossip recurrence with K applications of ``w``.

    ``x^{k+1} = (1 + eta) w x^k - eta x^{k-1}`` with ``x^{-1} = x^0``. The
    nonzeros of ``w`` are gathered row by row once; each product then runs
    over them in a fixed order, so results are reproducible.
    """
    cdef const double[:, ::1] W = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, ::1] prev = np.array(x0, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] cur = np.array(x0, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] nxt = np.empty_like(np.asarray(cur))
    cdef double[:, ::1] tmp
    cdef Py_ssize_t m = cur.shape[0], d = cur.shape[1]
    cdef Py_ssize_t k, i, l, j, q, nnz = 0
    cdef double wil, a = 1.0 + eta

    # compressed rows of w
    cdef Py_ssize_t[::1] row_start = np.zeros(m + 1, dtype=np.intp)
    for i in range(m):
        for l in range(m):
            if W[i, l] != 0.0:
                nnz += 1
        row_start[i + 1] = nnz
    cdef Py_ssize_t[::1] cols = np.empty(nnz, dtype=np.intp)
    cdef double[::1] vals = np.empty(nnz)
    q = 0
    for i in range(m):
        for l in range(m):
            if W[i, l] != 0.0:
                cols[q] = l
                vals[q] = W[i, l]
                q += 1

    cdef double* out
    cdef double* src
    cdef double* old
    for k in range(K):
        for i in range(m):
            out = &nxt[i, 0]
            old = &prev[i, 0]
            for j in range(d):
                out[j] = 0.0
            for q in range(row_start[i], row_start[i + 1]):
                wil = vals[q]
                src = &cur[cols[q], 0]
                for j in range(d):
                    out[j] += wil * src[j]
            for j in range(d):
                out[j] = a * out[j] - eta * old[j]
        tmp = prev
        prev = cur
        cur = nxt
        nxt = tmp
    return np.asarray(cur).copy()


def matrix_power_apply(w, x0, Py_ssize_t K):
    """Apply ``w`` K times to the block ``x0`` (plain gossip)."""
    return fastmix_recurrence(w, x0, K, 0.0)
