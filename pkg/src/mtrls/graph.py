"""Undirected network topology with deterministic neighbor ordering.

Nodes are integers 0..n_nodes-1.  Edges are unordered pairs stored in
canonical (min, max) form.  Each node's neighbor tuple is sorted
ascending, and that ordering is what gives the i-th neighbor slot of a
node its meaning everywhere else in the library, so it must never
change between runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from mtrls.errors import (
    DuplicateEdgeError,
    NodeIndexError,
    SelfLoopError,
    TooManyEdgesError,
)


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph.

    Attributes:
        n_nodes: number of nodes.
        edges: canonical (u, v) pairs with u < v, sorted.
        neighbors: per-node tuple of neighbor ids, ascending.
    """

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    neighbors: tuple[tuple[int, ...], ...]

    def degree(self, node: int) -> int:
        return len(self.neighbors[node])

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self.neighbors], dtype=int)

    def neighbor_slot(self, node: int, i: int) -> int:
        """Node id occupying neighbor slot i of ``node`` (ascending order)."""
        return self.neighbors[node][i]

    @cached_property
    def _adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes))
        for u, v in self.edges:
            a[u, v] = 1.0
            a[v, u] = 1.0
        return a

    def adjacency_matrix(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency matrix as floats."""
        return self._adjacency.copy()

    def neighbor_sum(self, values: np.ndarray) -> np.ndarray:
        """Sum rows of ``values`` over each node's neighbor set.

        values has one row per node; row n of the result is the sum of
        the rows of n's neighbors.  Summation order is the fixed node
        order, so results are deterministic.
        """
        return self._adjacency @ values

    def laplacian_matrix(self) -> np.ndarray:
        """Combinatorial Laplacian: degree matrix minus adjacency."""
        a = self.adjacency_matrix()
        return np.diag(a.sum(axis=1)) - a


def build_graph(n_nodes: int, edges) -> Graph:
    """Validate an edge list and construct a Graph.

    Args:
        n_nodes: number of nodes, must be positive.
        edges: iterable of (u, v) node pairs, undirected.

    Raises:
        SelfLoopError: an edge joins a node to itself.
        DuplicateEdgeError: an undirected edge appears twice.
        NodeIndexError: an endpoint is outside [0, n_nodes).
    """
    if n_nodes <= 0:
        raise NodeIndexError(f"n_nodes must be positive, got {n_nodes}")
    canonical: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise NodeIndexError(f"edge ({u}, {v}) outside [0, {n_nodes})")
        if u == v:
            raise SelfLoopError(f"self loop at node {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdgeError(f"edge {key} listed more than once")
        seen.add(key)
        canonical.append(key)
    canonical.sort()
    nbrs: list[list[int]] = [[] for _ in range(n_nodes)]
    for u, v in canonical:
        nbrs[u].append(v)
        nbrs[v].append(u)
    return Graph(
        n_nodes=n_nodes,
        edges=tuple(canonical),
        neighbors=tuple(tuple(sorted(ns)) for ns in nbrs),
    )


def random_graph(n_nodes: int, n_edges: int, seed) -> Graph:
    """Sample n_edges distinct undirected edges uniformly without replacement.

    Every edge set of the requested size is equally likely; connectivity
    is not enforced, so isolated nodes can occur.  The same seed always
    yields the same graph.

    Raises:
        TooManyEdgesError: n_edges exceeds n_nodes*(n_nodes-1)/2.
    """
    if n_nodes <= 0:
        raise NodeIndexError(f"n_nodes must be positive, got {n_nodes}")
    all_pairs = [(u, v) for u in range(n_nodes) for v in range(u + 1, n_nodes)]
    if n_edges > len(all_pairs):
        raise TooManyEdgesError(
            f"{n_edges} edges requested but only {len(all_pairs)} pairs exist"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(all_pairs), size=n_edges, replace=False)
    return build_graph(n_nodes, [all_pairs[i] for i in chosen])


def to_edge_list(graph: Graph) -> str:
    """Serialize to text: a node-count header then one 'u v' line per edge."""
    lines = [f"# nodes {graph.n_nodes}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges)
    return "\n".join(lines) + "\n"


def from_edge_list(text: str, n_nodes: int | None = None) -> Graph:
    """Parse the edge-list text format produced by to_edge_list.

    A '# nodes N' header sets the node count; otherwise ``n_nodes`` is
    used, falling back to max endpoint + 1.
    """
    edges: list[tuple[int, int]] = []
    header_nodes: int | None = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "nodes":
                header_nodes = int(parts[1])
            continue
        u_str, v_str = line.split()
        edges.append((int(u_str), int(v_str)))
    if header_nodes is not None:
        n = header_nodes
    elif n_nodes is not None:
        n = n_nodes
    else:
        n = max((max(u, v) for u, v in edges), default=-1) + 1
    return build_graph(n, edges)
