"""Dense eigenvalue routines used throughout the package.

Symmetric problems go through Householder tridiagonalization followed by
implicit QL with Wilkinson shifts (both in ``decopt.kernels``). The small
nonnegative 3x3 Perron problem is solved from its characteristic cubic.
"""

import numpy as np

from . import kernels
from .errors import DimensionError


def _check_square(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def eigvalsh(a, *, check_symmetric=True):
    """Eigenvalues of a real symmetric matrix in ascending order."""
    a = _check_square(a)
    if check_symmetric and not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(a).max(initial=0.0))):
        raise DimensionError("matrix is not symmetric")
    if a.shape[0] == 0:
        return np.zeros(0)
    diag, off = kernels.householder_tridiagonal(a)
    return np.sort(kernels.tridiagonal_eigenvalues(diag, off))


def extreme_eigenvalues(a):
    """``(smallest, largest)`` eigenvalue of a symmetric matrix."""
    ev = eigvalsh(a)
    return float(ev[0]), float(ev[-1])


def spectral_norm_sym(a):
    lo, hi = extreme_eigenvalues(a)
    return max(abs(lo), abs(hi))


def perron_pair_3x3(a):
    """Perron root and eigenvector of an irreducible nonnegative 3x3 matrix.

    The root is the largest real zero of the characteristic cubic. It is at
    least ``trace / 3`` and at most the largest row sum, and the cubic is
    convex and increasing to its right, so Newton's method started from the
    row-sum bound decreases monotonically onto it. The eigenvector is scaled
    so that its last entry equals 1.
    """
    a = _check_square(a)
    if a.shape != (3, 3):
        raise DimensionError("perron_pair_3x3 expects a 3x3 matrix")
    if (a < 0).any():
        raise ValueError("matrix must be entrywise nonnegative")

    tr = a[0, 0] + a[1, 1] + a[2, 2]
    c2 = (
        a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    )
    det = (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )

    lam = float(a.sum(axis=1).max())
    for _ in range(500):
        p = ((lam - tr) * lam + c2) * lam - det
        dp = (3.0 * lam - 2.0 * tr) * lam + c2
        if p <= 0.0 or dp <= 0.0:
            break
        nxt = lam - p / dp
        if nxt >= lam:
            break
        lam = nxt

    # (a - lam I) v = 0 with v[2] = 1, solved from the first two rows
    m2 = np.array([[a[0, 0] - lam, a[0, 1]], [a[1, 0], a[1, 1] - lam]])
    rhs = -np.array([a[0, 2], a[1, 2]])
    v12 = np.linalg.solve(m2, rhs)
    return lam, np.array([v12[0], v12[1], 1.0])
