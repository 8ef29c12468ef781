"""Dense simple-graph container and the topology queries built on it.

Graphs are stored as an ``n x n`` uint8 adjacency matrix.  Undirected graphs
keep the matrix symmetric; degree and edge caches are updated on every toggle
so the sampler and the statistics never need a full recount.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


class Dyad(NamedTuple):
    i: int
    j: int

    def canonical(self, directed: bool) -> "Dyad":
        if directed or self.i < self.j:
            return self
        return Dyad(self.j, self.i)


class Graph:
    """Simple graph on nodes ``0..n-1`` (no self-loops, no multi-edges).

    Parameters
    ----------
    n : int
        Number of nodes, at least one.
    directed : bool
        Whether ``adj[i, j]`` and ``adj[j, i]`` are independent.
    """

    def __init__(self, n: int, directed: bool = False):
        if int(n) < 1:
            raise ValueError(f"node count must be positive, got {n}")
        self.n = int(n)
        self.directed = bool(directed)
        self.adj = np.zeros((self.n, self.n), dtype=np.uint8)
        self.edge_count = 0
        # undirected graphs only use out_degree; in_degree aliases it
        self.out_degree = np.zeros(self.n, dtype=np.int64)
        self.in_degree = self.out_degree if not directed else np.zeros(self.n, dtype=np.int64)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], directed: bool = False) -> "Graph":
        g = cls(n, directed)
        for i, j in edges:
            if not g.has_edge(i, j):
                g.toggle(i, j)
        return g

    @classmethod
    def from_adjacency(cls, adj, directed: bool | None = None) -> "Graph":
        a = np.asarray(adj)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency has self-loops")
        a = (a != 0).astype(np.uint8)
        if directed is None:
            directed = not np.array_equal(a, a.T)
        elif not directed and not np.array_equal(a, a.T):
            raise ValueError("undirected adjacency must be symmetric")
        g = cls(a.shape[0], directed)
        g.adj[:] = a
        g.recompute_caches()
        return g

    @property
    def degree(self) -> np.ndarray:
        if self.directed:
            raise ValueError("degree is undefined for directed graphs; use in_degree/out_degree")
        return self.out_degree

    @property
    def n_dyads(self) -> int:
        n = self.n
        return n * (n - 1) if self.directed else n * (n - 1) // 2

    def _check(self, i: int, j: int) -> None:
        if i == j:
            raise ValueError(f"self-loop dyad ({i}, {j}) is not allowed")
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"dyad ({i}, {j}) out of range for n={self.n}")

    def has_edge(self, i: int, j: int) -> bool:
        self._check(i, j)
        return bool(self.adj[i, j])

    def toggle(self, i: int, j: int) -> "Graph":
        """Flip dyad ``(i, j)`` in place and return the graph."""
        self._check(i, j)
        sign = -1 if self.adj[i, j] else 1
        self.adj[i, j] ^= 1
        if not self.directed:
            self.adj[j, i] ^= 1
            self.out_degree[i] += sign
            self.out_degree[j] += sign
        else:
            self.out_degree[i] += sign
            self.in_degree[j] += sign
        self.edge_count += sign
        return self

    def recompute_caches(self) -> None:
        a = self.adj.astype(np.int64)
        if self.directed:
            self.out_degree = a.sum(axis=1)
            self.in_degree = a.sum(axis=0)
            self.edge_count = int(a.sum())
        else:
            self.out_degree = a.sum(axis=1)
            self.in_degree = self.out_degree
            self.edge_count = int(a.sum()) // 2

    def copy(self) -> "Graph":
        g = Graph(self.n, self.directed)
        g.adj[:] = self.adj
        g.edge_count = self.edge_count
        g.out_degree = self.out_degree.copy()
        g.in_degree = g.out_degree if not self.directed else self.in_degree.copy()
        return g

    def edges(self) -> list[Dyad]:
        if self.directed:
            return [Dyad(int(i), int(j)) for i, j in zip(*np.nonzero(self.adj))]
        return [Dyad(int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(self.adj, 1)))]

    def dyads(self) -> list[Dyad]:
        n = self.n
        if self.directed:
            return [Dyad(i, j) for i in range(n) for j in range(n) if i != j]
        return [Dyad(i, j) for i in range(n) for j in range(i + 1, n)]

    def density(self) -> float:
        return self.edge_count / self.n_dyads if self.n_dyads else 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.directed == other.directed and np.array_equal(self.adj, other.adj)

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, {kind}, edges={self.edge_count})"


def new_graph(n: int, directed: bool = False) -> Graph:
    return Graph(n, directed)


def _require_undirected(g: Graph, what: str) -> None:
    if g.directed:
        raise ValueError(f"{what} requires an undirected graph")


def degree_histogram(g: Graph) -> np.ndarray:
    """Counts ``D_1..D_{n-1}``; entry ``k-1`` is the number of nodes of degree ``k``."""
    _require_undirected(g, "degree_histogram")
    counts = np.bincount(g.out_degree, minlength=g.n)
    return counts[1:g.n].copy()


def shared_partner_matrix(g: Graph) -> np.ndarray:
    """All-pairs count of common neighbours (undirected)."""
    a = g.adj.astype(np.int64)
    sp = a @ a
    np.fill_diagonal(sp, 0)
    return sp


def shared_partner_count(g: Graph, d: Dyad | tuple[int, int]) -> int:
    i, j = d
    g._check(i, j)
    return int(np.dot(g.adj[i].astype(np.int64), g.adj[j].astype(np.int64)))


def esp_histogram(g: Graph) -> np.ndarray:
    """Counts ``EP_0..EP_{n-2}``; entry ``k`` is the number of edges with ``k`` shared partners."""
    _require_undirected(g, "esp_histogram")
    sp = shared_partner_matrix(g)
    iu = np.triu_indices(g.n, 1)
    on_edges = sp[iu][g.adj[iu] == 1]
    return np.bincount(on_edges, minlength=max(g.n - 1, 1))[: max(g.n - 1, 1)]


def geodesic_distribution(g: Graph) -> np.ndarray:
    """Pair counts by shortest-path length.

    Returns an array of length ``n`` where entry ``l-1`` counts pairs at
    distance ``l`` for ``l = 1..n-1`` and the last entry counts unreachable
    pairs.  Pairs are ordered for directed graphs and unordered otherwise.
    """
    n = g.n
    out = np.zeros(n, dtype=np.int64)
    if n == 1:
        return out
    dist = shortest_path(csr_matrix(g.adj), method="D", directed=g.directed, unweighted=True)
    if g.directed:
        mask = ~np.eye(n, dtype=bool)
    else:
        mask = np.triu(np.ones((n, n), dtype=bool), 1)
    d = dist[mask]
    finite = np.isfinite(d)
    out[:-1] = np.bincount(d[finite].astype(np.int64), minlength=n)[1:n]
    out[-1] = int((~finite).sum())
    return out
