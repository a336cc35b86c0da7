"""Network layers: Moore square lattice and two-dimensional Watts-Strogatz graph.

A layer is stored in CSR form (``indptr``/``indices``) so the compiled
simulation kernel can read it without conversion.  Agent ``(r, c)`` on a
``side x side`` grid has index ``r * side + c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from pvqvoter.errors import ConstructionFailed, InvalidIndex, InvalidParameter, UnsupportedParameter

WS2D_MAX_ATTEMPTS = 100
REWIRING_CONVENTION = "per-edge; keep lower-indexed endpoint; redraw target on self-loop or duplicate"


@dataclass(frozen=True, eq=False)
class Layer:
    """Undirected simple graph on agents ``0..n-1`` in CSR layout."""

    indptr: np.ndarray
    indices: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        indptr.flags.writeable = False
        indices.flags.writeable = False
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_adjacency(cls, adjacency: Sequence[Iterable[int]], metadata: dict | None = None) -> "Layer":
        """Build a layer from per-agent neighbour lists, kept exactly as given."""
        rows = [list(map(int, nbrs)) for nbrs in adjacency]
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(r) for r in rows])
        flat = [j for r in rows for j in r]
        return cls(indptr, np.asarray(flat, dtype=np.int64), dict(metadata or {}))

    @classmethod
    def from_edges(cls, n: int, edges: np.ndarray, metadata: dict | None = None) -> "Layer":
        """Build a layer from an ``(m, 2)`` array of undirected edges."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        return cls(np.cumsum(indptr), dst, dict(metadata or {}))

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.indices[self.indptr[i]:self.indptr[i + 1]].tolist() for i in range(self.n)]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edges(self) -> np.ndarray:
        """Edges ``(i, j)`` with ``i < j``, sorted lexicographically."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    @property
    def edge_count(self) -> int:
        return len(self.edges())

    def same_structure(self, other: "Layer") -> bool:
        return np.array_equal(self.indptr, other.indptr) and np.array_equal(self.indices, other.indices)


@dataclass(frozen=True)
class TwoLayerNetwork:
    spatial: Layer
    social: Layer

    def __post_init__(self):
        if self.spatial.n != self.social.n:
            raise InvalidParameter(
                f"layer sizes differ: spatial n={self.spatial.n}, social n={self.social.n}"
            )

    @property
    def n(self) -> int:
        return self.spatial.n


def _check_side_range(side: int, radius: int) -> None:
    if int(side) != side or side < 3:
        raise InvalidParameter(f"side must be an integer >= 3, got {side}")
    if radius != 1:
        raise UnsupportedParameter(f"only neighbourhood radius 1 is supported, got {radius}")


def _lattice_edges(side: int) -> np.ndarray:
    idx = np.arange(side * side, dtype=np.int64).reshape(side, side)
    blocks = [
        np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()]),  # horizontal
        np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()]),  # vertical
        np.column_stack([idx[:-1, :-1].ravel(), idx[1:, 1:].ravel()]),  # down-right
        np.column_stack([idx[:-1, 1:].ravel(), idx[1:, :-1].ravel()]),  # down-left
    ]
    edges = np.vstack(blocks)
    edges.sort(axis=1)
    return edges[np.lexsort((edges[:, 1], edges[:, 0]))]


def build_square_lattice(side: int, radius: int = 1) -> Layer:
    """Square lattice with Moore neighbourhood and open boundaries."""
    _check_side_range(side, radius)
    return Layer.from_edges(side * side, _lattice_edges(side),
                            {"kind": "square_lattice", "side": side, "radius": radius})


def _rewire(side: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    base = _lattice_edges(side)
    n = side * side
    adj = [set() for _ in range(n)]
    for i, j in base.tolist():
        adj[i].add(j)
        adj[j].add(i)
    out = base.copy()
    flags = rng.random(len(base)) < beta
    for e in np.nonzero(flags)[0]:
        i, j = int(base[e, 0]), int(base[e, 1])
        if len(adj[i]) >= n - 1:
            continue
        while True:
            k = int(rng.integers(n))
            if k != i and k not in adj[i]:
                break
        adj[i].discard(j)
        adj[j].discard(i)
        adj[i].add(k)
        adj[k].add(i)
        out[e] = (i, k) if i < k else (k, i)
    return out


def is_connected(layer: Layer) -> bool:
    if layer.n == 0:
        return True
    mat = csr_matrix((np.ones(len(layer.indices)), layer.indices, layer.indptr),
                     shape=(layer.n, layer.n))
    count, _ = connected_components(mat, directed=False)
    return count == 1


def build_ws2d(side: int, radius: int = 1, beta: float = 0.2,
               rng: np.random.Generator | int | None = None,
               max_attempts: int = WS2D_MAX_ATTEMPTS) -> Layer:
    """Two-dimensional Watts-Strogatz graph.

    Each Moore-lattice edge ``(i, j)``, ``i < j``, is picked for rewiring with
    probability ``beta``; ``i`` keeps the edge and the other end moves to a
    uniformly random agent, redrawn until it is neither ``i`` nor already
    adjacent to ``i``.  Edge count is preserved.  A disconnected draw is
    discarded and redrawn from the continuing random stream.
    """
    _check_side_range(side, radius)
    if not 0.0 <= beta <= 1.0:
        raise InvalidParameter(f"beta must lie in [0, 1], got {beta}")
    seed = rng if not isinstance(rng, np.random.Generator) else None
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    n = side * side
    for attempt in range(1, max_attempts + 1):
        edges = _rewire(side, beta, gen)
        layer = Layer.from_edges(n, edges, {
            "kind": "ws2d", "side": side, "radius": radius, "beta": beta,
            "attempts": attempt, "seed": seed, "rewiring": REWIRING_CONVENTION,
        })
        if is_connected(layer):
            return layer
    raise ConstructionFailed(seed, max_attempts)


def build_two_layer(side: int, beta: float, rng: np.random.Generator | int | None = None) -> TwoLayerNetwork:
    return TwoLayerNetwork(build_square_lattice(side), build_ws2d(side, 1, beta, rng))


def neighbors(layer: Layer, agent: int) -> list[int]:
    if not 0 <= agent < layer.n:
        raise InvalidIndex(f"agent {agent} outside 0..{layer.n - 1}")
    return layer.indices[layer.indptr[agent]:layer.indptr[agent + 1]].tolist()


def validate_layer(layer: Layer) -> list[str]:
    """Describe every violated layer invariant; an empty list means valid."""
    problems: list[str] = []
    adjacency = layer.adjacency
    sets = [set(nbrs) for nbrs in adjacency]
    for i, nbrs in enumerate(adjacency):
        if i in sets[i]:
            problems.append(f"self-loop at agent {i}")
        if len(sets[i]) != len(nbrs):
            problems.append(f"duplicate neighbour entries at agent {i}")
        for j in sets[i]:
            if not 0 <= j < layer.n:
                problems.append(f"agent {i} lists out-of-range neighbour {j}")
            elif i not in sets[j]:
                problems.append(f"asymmetric edge ({i}, {j}): listed by {i} but not by {j}")
    if layer.n and all(0 <= j < layer.n for j in layer.indices.tolist()) and not is_connected(layer):
        problems.append("layer is not connected")
    return problems


def write_edge_list(layer: Layer, destination: str | Path) -> None:
    """Dump as text: header ``n=<n>`` then one ``i j`` line per edge, ``i < j``."""
    edges = layer.edges()
    with open(destination, "w", encoding="utf-8") as fh:
        fh.write(f"n={layer.n}\n")
        for i, j in edges.tolist():
            fh.write(f"{i} {j}\n")


def read_edge_list(source: str | Path) -> Layer:
    with open(source, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise InvalidParameter(f"edge list must start with 'n=<n>', got {header!r}")
        n = int(header[2:])
        pairs = [tuple(map(int, line.split())) for line in fh if line.strip()]
    return Layer.from_edges(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))
