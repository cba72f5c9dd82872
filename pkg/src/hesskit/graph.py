"""Undirected interaction graphs with a fixed edge orientation.

Vertex ids are 1-based at the public surface; the index arrays
``sources`` / ``sinks`` are 0-based for numpy indexing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graph input (bad range, self-loop, duplicate)."""


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    sources: np.ndarray = field(init=False, repr=False, compare=False)
    sinks: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        src = np.array([e[0] - 1 for e in self.edges], dtype=np.intp)
        snk = np.array([e[1] - 1 for e in self.edges], dtype=np.intp)
        src.setflags(write=False)
        snk.setflags(write=False)
        object.__setattr__(self, "sources", src)
        object.__setattr__(self, "sinks", snk)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_index(self, i: int, j: int) -> int | None:
        """Index of the undirected edge {i, j}, or None."""
        for k, (a, b) in enumerate(self.edges):
            if (a, b) == (i, j) or (a, b) == (j, i):
                return k
        return None


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Validate and build a graph; edge ``(i, j)`` is oriented source i -> sink j."""
    if int(n) != n or n < 1:
        raise GraphError(f"vertex count must be a positive integer, got {n!r}")
    n = int(n)
    seen: set[frozenset[int]] = set()
    out = []
    for k, e in enumerate(edges):
        if len(e) != 2:
            raise GraphError(f"edge #{k + 1} {tuple(e)!r} is not a vertex pair")
        i, j = (int(v) for v in e)
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphError(f"edge #{k + 1} ({i}, {j}) has a vertex outside 1..{n}")
        if i == j:
            raise GraphError(f"edge #{k + 1} ({i}, {j}) is a self-loop")
        key = frozenset((i, j))
        if key in seen:
            raise GraphError(f"edge #{k + 1} ({i}, {j}) duplicates an earlier edge")
        seen.add(key)
        out.append((i, j))
    return Graph(n, tuple(out))


def incidence_matrix(g: Graph) -> np.ndarray:
    """m x n incidence matrix: -1 at the source, +1 at the sink of each edge."""
    H = np.zeros((g.m, g.n))
    rows = np.arange(g.m)
    H[rows, g.sources] = -1.0
    H[rows, g.sinks] = 1.0
    return H


def laplacian(g: Graph, weights: np.ndarray | None = None) -> np.ndarray:
    """Graph Laplacian ``H^T W H`` (``W = I`` when no weights are given)."""
    H = incidence_matrix(g)
    if weights is None:
        return H.T @ H
    return H.T @ (np.asarray(weights, dtype=float)[:, None] * H)


def neighbors(g: Graph, i: int) -> set[int]:
    if not 1 <= i <= g.n:
        raise GraphError(f"vertex {i} outside 1..{g.n}")
    out = set()
    for a, b in g.edges:
        if a == i:
            out.add(b)
        elif b == i:
            out.add(a)
    return out
