"""Network topologies, Laplacian mixing matrices and their spectra."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError, DimensionError, DisconnectedGraphError
from .linalg import eigvalsh

MAX_ER_ATTEMPTS = 100
TOPOLOGIES = ("ring", "path", "complete", "star")


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on agents ``0..m-1``.

    ``edges`` holds pairs ``(i, j)`` with ``i < j``, sorted. ``weights`` is
    either ``None`` (all ones) or one positive weight per edge.
    """

    m: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("graph needs at least one agent")
        normalized = {}
        weights = self.weights if self.weights is not None else (1.0,) * len(self.edges)
        if len(weights) != len(self.edges):
            raise ValueError("one weight per edge required")
        for (i, j), wgt in zip(self.edges, weights):
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at agent {i}")
            if not (0 <= i < self.m and 0 <= j < self.m):
                raise ValueError(f"edge ({i}, {j}) outside 0..{self.m - 1}")
            if not wgt > 0.0:
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {wgt}")
            key = (min(i, j), max(i, j))
            if key in normalized:
                raise ValueError(f"duplicate edge {key}")
            normalized[key] = float(wgt)
        keys = tuple(sorted(normalized))
        object.__setattr__(self, "edges", keys)
        if self.weights is None:
            object.__setattr__(self, "weights", None)
        else:
            object.__setattr__(self, "weights", tuple(normalized[k] for k in keys))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_weights(self) -> tuple[float, ...]:
        return self.weights if self.weights is not None else (1.0,) * len(self.edges)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.m, self.m))
        for (i, j), wgt in zip(self.edges, self.edge_weights()):
            a[i, j] = a[j, i] = wgt
        return a

    def laplacian(self) -> np.ndarray:
        a = self.adjacency()
        return np.diag(a.sum(axis=1)) - a

    def neighbors(self) -> list[list[int]]:
        nbrs = [[] for _ in range(self.m)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def is_connected(self) -> bool:
        nbrs = self.neighbors()
        seen = [False] * self.m
        seen[0] = True
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in nbrs[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
        return all(seen)

    # -- edge-list text format: "m" then "i j [weight]" per line, 0-based --

    def to_edgelist(self) -> str:
        lines = [str(self.m)]
        for (i, j), wgt in zip(self.edges, self.edge_weights()):
            if self.weights is None:
                lines.append(f"{i} {j}")
            else:
                lines.append(f"{i} {j} {wgt!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edgelist(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines()]
        content = [(no, r) for no, r in enumerate(rows, start=1) if r and not r[0].startswith("#")]
        if not content:
            raise DataFormatError("empty edge list")
        no, head = content[0]
        if len(head) != 1:
            raise DataFormatError("first line must hold the agent count", line=no)
        try:
            m = int(head[0])
        except ValueError:
            raise DataFormatError(f"bad agent count {head[0]!r}", line=no) from None
        edges, weights, weighted = [], [], False
        for no, r in content[1:]:
            if len(r) not in (2, 3):
                raise DataFormatError("expected 'i j [weight]'", line=no)
            try:
                edges.append((int(r[0]), int(r[1])))
                if len(r) == 3:
                    weighted = True
                    weights.append(float(r[2]))
                else:
                    weights.append(1.0)
            except ValueError:
                raise DataFormatError(f"unparseable edge {' '.join(r)!r}", line=no) from None
        try:
            return cls(m, tuple(edges), tuple(weights) if weighted else None)
        except ValueError as exc:
            raise DataFormatError(str(exc)) from None

    def save(self, path) -> None:
        Path(path).write_text(self.to_edgelist())

    @classmethod
    def load(cls, path) -> "Graph":
        return cls.from_edgelist(Path(path).read_text())


def generate_erdos_renyi(m: int, p: float, seed: int, max_attempts: int = MAX_ER_ATTEMPTS) -> Graph:
    """Sample a connected G(m, p) graph.

    Attempt ``k`` draws every pair independently with a generator seeded by
    ``seed + k``; the first connected sample is returned.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    iu, ju = np.triu_indices(m, k=1)
    for attempt in range(max_attempts):
        rng = np.random.default_rng(seed + attempt)
        keep = rng.random(iu.size) < p
        g = Graph(m, tuple(zip(iu[keep].tolist(), ju[keep].tolist())))
        if g.is_connected():
            return g
    raise DisconnectedGraphError(
        f"disconnected graph: no connected G(m={m}, p={p}) sample in {max_attempts} attempts "
        f"(seeds {seed}..{seed + max_attempts - 1})",
        m=m,
        p=p,
        attempts=max_attempts,
    )


def generate_named(topology: str, m: int) -> Graph:
    if m < 2:
        raise ValueError("m must be at least 2")
    if topology == "ring":
        edges = [(i, i + 1) for i in range(m - 1)]
        if m > 2:
            edges.append((0, m - 1))
    elif topology == "path":
        edges = [(i, i + 1) for i in range(m - 1)]
    elif topology == "complete":
        edges = [(i, j) for i in range(m) for j in range(i + 1, m)]
    elif topology == "star":
        edges = [(0, j) for j in range(1, m)]
    else:
        raise ValueError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")
    return Graph(m, tuple(edges))


@dataclass(frozen=True)
class SpectralQuantities:
    lambda1: float
    lambda2: float
    gap: float

    def rho_for(self, K: int) -> float:
        """Contraction factor ``(1 - sqrt(gap))**K`` of K accelerated mixing rounds."""
        return (1.0 - math.sqrt(self.gap)) ** K


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Symmetric doubly stochastic ``W = I - L / lambda_max(L)``.

    ``gap`` is computed from the Laplacian spectrum directly
    (``lambda_min_nonzero(L) / lambda_max(L)``) to avoid cancellation in
    ``1 - lambda2``.
    """

    entries: np.ndarray = field(repr=False)
    lambda2: float
    gap: float
    laplacian_eigenvalues: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of W, ascending."""
        lam = self.laplacian_eigenvalues
        return np.sort(1.0 - lam / lam[-1])

    def spectral_quantities(self) -> SpectralQuantities:
        return SpectralQuantities(lambda1=1.0, lambda2=self.lambda2, gap=self.gap)


def build_mixing_matrix(g: Graph) -> MixingMatrix:
    if g.m == 1:
        raise DimensionError("a mixing matrix needs at least two agents")
    if not g.is_connected():
        raise DisconnectedGraphError(f"graph on {g.m} agents is disconnected", m=g.m)
    lap = g.laplacian()
    lam = eigvalsh(lap)
    lam_max = float(lam[-1])
    w = np.eye(g.m) - lap / lam_max
    w = 0.5 * (w + w.T)
    gap = float(lam[1]) / lam_max
    entries = w.copy()
    entries.setflags(write=False)
    lam.setflags(write=False)
    return MixingMatrix(entries=entries, lambda2=1.0 - gap, gap=gap, laplacian_eigenvalues=lam)


def spectral_quantities(w: MixingMatrix) -> SpectralQuantities:
    return w.spectral_quantities()


def parse_graph_spec(spec: str) -> Graph:
    """Build a graph from a compact spec or an edge-list file.

    Accepted forms: ``er:m=100,p=0.5,seed=0``, ``ring:m=20`` (also ``path``,
    ``complete``, ``star``), or a path to an edge-list file.
    """
    path = Path(spec)
    if path.exists():
        return Graph.load(path)
    kind, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"bad graph parameter {item!r}")
        params[key.strip()] = val.strip()
    try:
        if kind in ("er", "erdos_renyi"):
            return generate_erdos_renyi(int(params["m"]), float(params["p"]), int(params.get("seed", 0)))
        if kind in TOPOLOGIES:
            return generate_named(kind, int(params["m"]))
    except KeyError as exc:
        raise ValueError(f"graph spec {spec!r} missing parameter {exc}") from None
    raise ValueError(f"unrecognised graph spec {spec!r}")
