"""Gossip averaging: accelerated FastMix recurrence and plain repeated mixing.

An iterate block is an ``(m, d)`` array whose row ``i`` is agent ``i``'s
local vector. One multiplication by W is one communication round.
"""

import math

import numpy as np

from . import kernels
from .errors import DimensionError


def _as_block(x, w):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionError(f"iterate block must be 2-D, got shape {x.shape}")
    if x.shape[0] != w.m:
        raise DimensionError(f"block has {x.shape[0]} rows but the network has {w.m} agents")
    return x


def fastmix_step_size(lambda2: float) -> float:
    """Momentum weight of the accelerated gossip recurrence.

    Built from ``lambda2**2``, which puts the slowest mode at critical damping.
    """
    root = math.sqrt(max(0.0, 1.0 - lambda2 * lambda2))
    return (1.0 - root) / (1.0 + root)


def fastmix(x0, w, K: int) -> np.ndarray:
    """Run K rounds of accelerated gossip on the block ``x0``.

    Computes ``x^{k+1} = (1 + eta_w) W x^k - eta_w x^{k-1}`` from
    ``x^{-1} = x^0`` and returns ``x^K``. K counts applications of W, so
    ``K = 0`` is the identity. The column means of the block are preserved.
    """
    if K < 0:
        raise ValueError("K must be non-negative")
    squeeze = np.ndim(x0) == 1
    x = _as_block(x0, w)
    if K == 0:
        out = x.copy()
    else:
        out = kernels.fastmix_recurrence(w.entries, x, int(K), fastmix_step_size(w.lambda2))
    return out[:, 0] if squeeze else out


def plain_mix(x0, w, K: int) -> np.ndarray:
    """``W^K x0``: K rounds of plain gossip."""
    if K < 0:
        raise ValueError("K must be non-negative")
    squeeze = np.ndim(x0) == 1
    x = _as_block(x0, w)
    out = x.copy() if K == 0 else kernels.matrix_power_apply(w.entries, x, int(K))
    return out[:, 0] if squeeze else out


def mean_row(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x.mean(axis=0)


def consensus_error(x) -> float:
    """Frobenius distance from the block to its row average."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    return float(np.linalg.norm(x - x.mean(axis=0)))


def contraction_bound(lambda2: float, K: int) -> float:
    """``(1 - sqrt(1 - lambda2))**K``, the advertised FastMix contraction."""
    return (1.0 - math.sqrt(max(0.0, 1.0 - lambda2))) ** K
