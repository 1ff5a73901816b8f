"""Binary classification data: LIBSVM ingestion, sharding and a synthetic stand-in."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, ProblemError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense features (n x d) with labels in {-1, +1}."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.features, dtype=np.float64)
        b = np.asarray(self.labels, dtype=np.float64)
        if a.ndim != 2:
            raise ProblemError(f"features must be 2-D, got shape {a.shape}")
        if b.shape != (a.shape[0],):
            raise ProblemError(f"{b.size} labels for {a.shape[0]} feature rows")
        if not np.isfinite(a).all():
            raise ProblemError("features contain non-finite entries")
        if not np.isin(b, (-1.0, 1.0)).all():
            raise ProblemError("labels must be exactly -1 or +1")
        object.__setattr__(self, "features", a)
        object.__setattr__(self, "labels", b)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


def _parse_label(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataFormatError(f"bad label {token!r}", line=lineno) from None
    if value == 1.0:
        return 1.0
    if value in (-1.0, 0.0):
        return -1.0
    raise DataFormatError(f"label {token!r} is not one of -1, 0, +1", line=lineno)


def load_libsvm(path, d_hint: int | None = None) -> Dataset:
    """Read a LIBSVM text file (``label idx:val ...``, 1-based indices).

    Labels 0 are mapped to -1. Without ``d_hint`` the dimension is the
    largest index seen; with it, larger indices are an error.
    """
    labels, rows, cols, vals = [], [], [], []
    max_idx = 0
    with open(Path(path)) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            labels.append(_parse_label(tokens[0], lineno))
            r = len(labels) - 1
            prev = 0
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise DataFormatError(f"expected idx:val, got {tok!r}", line=lineno)
                try:
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise DataFormatError(f"unparseable feature {tok!r}", line=lineno) from None
                if idx < 1:
                    raise DataFormatError(f"feature index {idx} is not 1-based", line=lineno)
                if idx <= prev:
                    raise DataFormatError("feature indices must be strictly increasing", line=lineno)
                if d_hint is not None and idx > d_hint:
                    raise DataFormatError(f"feature index {idx} exceeds dimension {d_hint}", line=lineno)
                prev = idx
                max_idx = max(max_idx, idx)
                rows.append(r)
                cols.append(idx - 1)
                vals.append(val)
    if not labels:
        raise DataFormatError(f"{path}: no data rows")
    d = d_hint if d_hint is not None else max_idx
    features = np.zeros((len(labels), d))
    features[rows, cols] = vals
    return Dataset(features, np.array(labels))


def partition(data: Dataset, m: int, n_per_agent: int, seed: int) -> list[Dataset]:
    """Shuffle rows with ``seed`` and cut ``m`` contiguous shards of ``n_per_agent``.

    Rows beyond ``m * n_per_agent`` are dropped.
    """
    if m < 1 or n_per_agent < 1:
        raise ValueError("m and n_per_agent must be positive")
    need = m * n_per_agent
    if need > data.n:
        raise ProblemError(f"need {need} rows for {m} shards of {n_per_agent}, have {data.n}")
    order = np.random.default_rng(seed).permutation(data.n)[:need]
    shards = []
    for i in range(m):
        idx = order[i * n_per_agent:(i + 1) * n_per_agent]
        shards.append(Dataset(data.features[idx], data.labels[idx]))
    return shards


def synthetic_logistic(
    m: int,
    n: int,
    d: int,
    seed: int,
    label_noise: float = 0.1,
    scale_decay: float = 1.0,
) -> list[Dataset]:
    """Seeded stand-in for a sharded binary classification set.

    Features are Gaussian with column ``k`` scaled by ``(k + 1)**(-scale_decay / 2)``
    so the data Hessian is ill-conditioned, as with real sparse data. Labels
    come from a planted separator and are flipped with probability
    ``label_noise``.
    """
    if not 0.0 <= label_noise < 0.5:
        raise ValueError("label_noise must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)
    scales = (np.arange(1, d + 1, dtype=np.float64)) ** (-scale_decay / 2.0)
    w_true = rng.standard_normal(d) / np.sqrt(d)
    shards = []
    for _ in range(m):
        a = rng.standard_normal((n, d)) * scales
        margin = a @ (w_true / scales.mean())
        b = np.where(margin >= 0.0, 1.0, -1.0)
        flip = rng.random(n) < label_noise
        b[flip] = -b[flip]
        shards.append(Dataset(a, b))
    return shards
