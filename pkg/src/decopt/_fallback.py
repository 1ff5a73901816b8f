"""Pure-Python twins of the compiled kernels in ``_core.pyx``.

Same signatures and semantics; used when the extension is not built or when
``DECOPT_KERNELS=python`` is set.
"""

import math

import numpy as np

MAX_QL_ITER = 60
EPS = np.finfo(np.float64).eps


def householder_tridiagonal(a):
    A = np.array(a, dtype=np.float64, copy=True)
    n = A.shape[0]
    off = np.zeros(max(n - 1, 0))
    for k in range(n - 2):
        x = A[k + 1:, k]
        norm2 = float(x @ x)
        if norm2 == 0.0:
            continue
        alpha = math.sqrt(norm2)
        if x[0] < 0.0:
            alpha = -alpha
        u = x.copy()
        u[0] += alpha
        h = norm2 + alpha * x[0]
        B = A[k + 1:, k + 1:]
        p = B @ u / h
        p -= (u @ p) / (2.0 * h) * u
        B -= np.outer(u, p) + np.outer(p, u)
        off[k] = -alpha
    if n >= 2:
        off[n - 2] = A[n - 1, n - 2]
    return np.diag(A).copy(), off


def tridiagonal_eigenvalues(diag, offdiag):
    d = [float(v) for v in diag]
    n = len(d)
    e = [float(v) for v in offdiag] + [0.0] * (n - len(offdiag))
    hypot = math.hypot
    for l in range(n):
        it = 0
        while True:
            mm = l
            while mm < n - 1:
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) <= EPS * dd:
                    break
                mm += 1
            if mm == l:
                break
            it += 1
            if it > MAX_QL_ITER:
                raise ArithmeticError("tridiagonal QL failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[mm] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
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
    return np.array(d)


def fastmix_recurrence(w, x0, K, eta):
    w = np.asarray(w, dtype=np.float64)
    prev = np.array(x0, dtype=np.float64, copy=True)
    cur = prev.copy()
    for _ in range(K):
        prev, cur = cur, (1.0 + eta) * (w @ cur) - eta * prev
    return cur


def matrix_power_apply(w, x0, K):
    w = np.asarray(w, dtype=np.float64)
    x = np.array(x0, dtype=np.float64, copy=True)
    for _ in range(K):
        x = w @ x
    return x
