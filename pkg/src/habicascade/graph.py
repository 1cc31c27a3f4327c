"""Undirected graphs, edge-list I/O, synthetic generators and Table-style metrics."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp

__all__ = [
    "EdgeListError",
    "Graph",
    "GraphMetrics",
    "LoadSummary",
    "generate_ba",
    "generate_er",
    "generate_ws",
    "complete_graph",
    "path_graph",
    "star_graph",
    "graph_metrics",
    "load_edge_list",
    "parse_edge_list",
    "read_edge_list",
    "write_edge_list",
]

log = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


class EdgeListError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class Graph:
    """Immutable simple undirected graph over dense ids ``0..node_count-1``.

    Adjacency is stored in CSR form (``indptr``, ``indices``) with each
    neighbour list sorted ascending. Position ``k`` in ``indices`` identifies
    the directed edge ``u -> indices[k]`` where ``indptr[u] <= k < indptr[u+1]``;
    coordinated draws are indexed the same way.
    """

    __slots__ = ("node_count", "edges", "labels", "indptr", "indices", "_label_index")

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]] | np.ndarray,
                 labels: Iterable[str] | None = None):
        node_count = int(node_count)
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= node_count):
            raise ValueError("edge endpoint outside [0, node_count)")
        arr = arr[arr[:, 0] != arr[:, 1]]
        arr = np.sort(arr, axis=1)
        arr = np.unique(arr, axis=0) if arr.size else arr.reshape(0, 2)

        labels = tuple(str(i) for i in range(node_count)) if labels is None else tuple(labels)
        if len(labels) != node_count:
            raise ValueError("labels must have one entry per node")
        label_index = {label: i for i, label in enumerate(labels)}
        if len(label_index) != node_count:
            raise ValueError("labels must be unique")

        src = np.concatenate([arr[:, 0], arr[:, 1]])
        dst = np.concatenate([arr[:, 1], arr[:, 0]])
        order = np.lexsort((dst, src))
        indices = dst[order]
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=node_count), out=indptr[1:])

        for a in (arr, indices, indptr):
            a.flags.writeable = False
        object.__setattr__(self, "node_count", node_count)
        object.__setattr__(self, "edges", arr)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "_label_index", label_index)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def __getstate__(self):
        return (self.node_count, self.edges, self.labels)

    def __setstate__(self, state):
        Graph.__init__(self, *state)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.node_count == other.node_count and self.labels == other.labels
                and np.array_equal(self.edges, other.edges))

    def __hash__(self) -> int:
        return hash((self.node_count, self.labels, self.edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def directed_edge_count(self) -> int:
        return len(self.indices)

    @property
    def label_index(self) -> dict[str, int]:
        return dict(self._label_index)

    def id_of(self, label: str) -> int:
        return self._label_index[label]

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int64)
        return sp.csr_matrix((data, self.indices, self.indptr),
                             shape=(self.node_count, self.node_count))


@dataclass(frozen=True)
class LoadSummary:
    lines: int
    self_loops: int
    duplicates: int


def parse_edge_list(source: str | TextIO) -> tuple[Graph, LoadSummary]:
    """Parse edge-list text, returning the graph and a count of dropped lines.

    Dense ids follow first appearance. Self-loops and repeated edges are
    dropped; a label that only appears in a self-loop still becomes a node.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    labels: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    loops = dups = lines = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListError(f"expected 2 tokens, found {len(tokens)}", lineno)
        lines += 1
        u, v = (labels.setdefault(tok, len(labels)) for tok in tokens)
        if u == v:
            loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            dups += 1
            continue
        seen.add(key)
        edges.append(key)
    if not labels:
        raise EdgeListError("edge list is empty")
    summary = LoadSummary(lines=lines, self_loops=loops, duplicates=dups)
    if loops or dups:
        log.info("dropped %d self-loops and %d duplicate edges", loops, dups)
    return Graph(len(labels), edges, labels=list(labels)), summary


def load_edge_list(source: str | TextIO) -> Graph:
    return parse_edge_list(source)[0]


def read_edge_list(path: str | Path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh)


def write_edge_list(g: Graph, target: str | Path | TextIO) -> None:
    """Write ``g`` in the edge-list format ``load_edge_list`` reads.

    Isolated nodes have no line to live on and are not preserved.
    """
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            write_edge_list(g, fh)
        return
    labels = g.labels
    for u, v in g.edges:
        target.write(f"{labels[u]} {labels[v]}\n")


def generate_ba(n: int, m: int, random_seed: int) -> Graph:
    """Barabasi-Albert preferential attachment grown from an m-clique."""
    if not 1 <= m < n:
        raise ValueError(f"BA requires 1 <= m < n, got n={n}, m={m}")
    rng = np.random.default_rng(random_seed)
    edges = [(i, j) for i in range(m) for j in range(i + 1, m)]
    # one entry per edge endpoint, so uniform picks are degree-proportional
    endpoints = [x for e in edges for x in e]
    for new in range(m, n):
        targets: set[int] = set()
        while len(targets) < m:
            if endpoints:
                targets.add(endpoints[rng.integers(len(endpoints))])
            else:
                targets.add(int(rng.integers(new)))
        for t in sorted(targets):
            edges.append((t, new))
            endpoints.extend((t, new))
    return Graph(n, edges)


def generate_er(n: int, p: float, random_seed: int) -> Graph:
    """G(n, p): every pair joined independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"ER requires 0 <= p <= 1, got p={p}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(random_seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return Graph(n, np.column_stack([iu[keep], ju[keep]]))


def generate_ws(n: int, k: int, beta: float, random_seed: int) -> Graph:
    """Watts-Strogatz small world: ring lattice with each edge rewired w.p. beta."""
    if k % 2 or not 0 <= k < n:
        raise ValueError(f"WS requires even k with 0 <= k < n, got n={n}, k={k}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"WS requires 0 <= beta <= 1, got beta={beta}")
    rng = np.random.default_rng(random_seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= beta:
                continue
            if len(adj[u]) >= n - 1:
                continue
            while True:
                w = int(rng.integers(n))
                if w != u and w not in adj[u]:
                    break
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph(n, edges)


@dataclass(frozen=True)
class GraphMetrics:
    mean_degree: float
    global_clustering: float
    mean_eigenvector_centrality: float


def eigenvector_centrality(g: Graph, tol: float = 1e-9, max_iter: int = 1000) -> np.ndarray:
    """Dominant eigenvector of the adjacency matrix, scaled so its max is 1.

    Iterates on ``A + I``; the shift leaves eigenvectors unchanged but stops
    the iteration oscillating on bipartite graphs.
    """
    n = g.node_count
    a = g.adjacency_matrix().astype(float)
    x = np.ones(n)
    for _ in range(max_iter):
        y = a @ x + x
        y /= y.max()
        if np.abs(y - x).max() < tol:
            return y
        x = y
    return x


def graph_metrics(g: Graph) -> GraphMetrics:
    if g.node_count < 1:
        raise ValueError("graph_metrics needs at least one node")
    deg = g.degrees()
    a = g.adjacency_matrix()
    # sum over v of closed neighbour pairs counted twice = 6 * triangles
    closed = int((a @ a).multiply(a).sum())
    triples = int((deg * (deg - 1) // 2).sum())
    clustering = (closed / 2) / triples if triples else 0.0
    return GraphMetrics(
        mean_degree=2.0 * g.edge_count / g.node_count,
        global_clustering=clustering,
        mean_eigenvector_centrality=float(eigenvector_centrality(g).mean()),
    )


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])
