"""Undirected simple graphs, Laplacians, spectral summaries and the vertex swap.

Graphs are immutable: a fixed vertex count and a sorted tuple of edges
(i, j) with i < j. Sorted storage gives deterministic iteration order,
which every schedule generator relies on. The single spectral backend is
dense symmetric eigendecomposition (numpy.linalg.eigh); target sizes are
a few thousand vertices at most.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import (
    DimensionMismatchError,
    DisconnectedGraphError,
    InvalidParamsError,
    InvalidVertexError,
    NotSubgraphError,
)

# An eigenvalue counts as zero when <= ZERO_EIG_REL * max(1, lambda_max).
# Dense solvers on integer Laplacians carry O(n * eps * lambda_max) noise.
ZERO_EIG_REL = 1e-9

# Floor used when certifying positive semidefiniteness numerically.
PSD_EIG_FLOOR = -1e-10


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1 with a sorted edge tuple."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidParamsError(f"vertex count must be positive, got {self.n}")
        prev = None
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise InvalidVertexError(f"edge ({i}, {j}) invalid for n={self.n}")
            if prev is not None and (i, j) <= prev:
                raise InvalidParamsError("edges must be strictly sorted")
            prev = (i, j)

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph, normalizing edge orientation and order."""
        norm = set()
        for a, b in pairs:
            if a == b:
                raise InvalidVertexError(f"self-loop at vertex {a}")
            norm.add((a, b) if a < b else (b, a))
        return cls(n, tuple(sorted(norm)))

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        nbr: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            nbr[i].add(j)
            nbr[j].add(i)
        return tuple(frozenset(s) for s in nbr)

    def neighbors(self, v: int) -> frozenset[int]:
        if not 0 <= v < self.n:
            raise InvalidVertexError(f"vertex {v} outside [0, {self.n})")
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def has_edge(self, i: int, j: int) -> bool:
        if i > j:
            i, j = j, i
        return (i, j) in self.edge_set

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n


@dataclass(frozen=True)
class SpectralSummary:
    """Largest and smallest-nonzero Laplacian eigenvalues and their ratio."""

    lambda_max: float
    lambda_min_plus: float
    chi: float


def laplacian(g: Graph) -> np.ndarray:
    """Degree matrix minus adjacency matrix, as a dense float array."""
    lap = np.zeros((g.n, g.n))
    for i, j in g.edges:
        lap[i, i] += 1.0
        lap[j, j] += 1.0
        lap[i, j] -= 1.0
        lap[j, i] -= 1.0
    return lap


def laplacian_eigenvalues(g: Graph) -> np.ndarray:
    """Ascending eigenvalues of the graph Laplacian."""
    return np.linalg.eigvalsh(laplacian(g))


def spectral_summary(g: Graph) -> SpectralSummary:
    """lambda_max, lambda_min_plus and chi of a connected graph's Laplacian.

    Raises DisconnectedGraphError when more than one eigenvalue falls below
    the zero threshold (multiplicity of 0 equals the component count).
    """
    if g.n < 2:
        raise InvalidParamsError("spectral summary needs at least 2 vertices")
    eig = laplacian_eigenvalues(g)
    lam_max = float(eig[-1])
    zero_cut = ZERO_EIG_REL * max(1.0, lam_max)
    nonzero = eig[eig > zero_cut]
    if len(nonzero) != g.n - 1:
        raise DisconnectedGraphError(
            f"{g.n - len(nonzero)} Laplacian eigenvalues below threshold; graph disconnected"
        )
    lam_min_plus = float(nonzero[0])
    return SpectralSummary(lam_max, lam_min_plus, lam_max / lam_min_plus)


def edge_diff(g1: Graph, g2: Graph) -> int:
    """Cardinality of the symmetric difference of the two edge sets."""
    if g1.n != g2.n:
        raise DimensionMismatchError(f"vertex counts differ: {g1.n} vs {g2.n}")
    return len(g1.edge_set ^ g2.edge_set)


def swap_vertices(g: Graph, u: int, v: int) -> Graph:
    """Exchange the neighborhoods of u and v; an edge (u, v) is preserved.

    Labels stay, adjacency moves: every edge (u, w) with w not in {u, v}
    becomes (v, w) and vice versa. Changes at most 2 (deg u + deg v) edges.
    """
    if u == v:
        raise InvalidVertexError("swap endpoints must differ")
    for x in (u, v):
        if not 0 <= x < g.n:
            raise InvalidVertexError(f"vertex {x} outside [0, {g.n})")
    nu = g.neighbors(u) - {v}
    nv = g.neighbors(v) - {u}
    edges = [e for e in g.edges if u not in e and v not in e]
    if g.has_edge(u, v):
        edges.append((min(u, v), max(u, v)))
    edges.extend((min(v, w), max(v, w)) for w in nu)
    edges.extend((min(u, w), max(u, w)) for w in nv)
    return Graph(g.n, tuple(sorted(edges)))


def laplacian_monotone_psd_check(g_big: Graph, g_small: Graph) -> bool:
    """True iff laplacian(g_big) - laplacian(g_small) is PSD.

    Requires g_small's edges to be contained in g_big's; the difference is
    then a sum of edge Laplacians and the check must pass.
    """
    if g_big.n != g_small.n:
        raise DimensionMismatchError("vertex counts differ")
    if not g_small.edge_set <= g_big.edge_set:
        raise NotSubgraphError("g_small is not an edge-subgraph of g_big")
    diff = laplacian(g_big) - laplacian(g_small)
    eig = np.linalg.eigvalsh(diff)
    return bool(eig[0] >= PSD_EIG_FLOOR)


def format_graph(g: Graph) -> str:
    """Serialize as text: first line 'n m', then one 'i j' line per edge."""
    lines = [f"{g.n} {len(g.edges)}"]
    lines.extend(f"{i} {j}" for i, j in g.edges)
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """Inverse of format_graph."""
    rows = [ln for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise InvalidParamsError("empty graph text")
    head = rows[0].split()
    if len(head) != 2:
        raise InvalidParamsError(f"bad header line: {rows[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(rows) - 1 != m:
        raise InvalidParamsError(f"expected {m} edge lines, found {len(rows) - 1}")
    edges = []
    for ln in rows[1:]:
        a, b = ln.split()
        edges.append((int(a), int(b)))
    return Graph.from_edges(n, edges)
