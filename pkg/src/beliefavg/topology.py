"""Neighbor graphs, time-varying schedules and connectivity checks.

Vertices are 0-based internally (agent ``i`` of the write-ups is vertex
``i - 1`` here).  A directed edge ``(i, j)`` means agent ``i`` can send to
agent ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Graph",
    "Static",
    "DynamicProbabilistic",
    "Explicit",
    "make_rgg",
    "make_connected_rgg",
    "make_directed_rgg",
    "default_radius",
    "is_connected",
    "is_strongly_connected",
    "union_graph",
    "is_repeatedly_jointly_connected",
    "sample_graph",
]


@dataclass(frozen=True, eq=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    directed: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"graph needs at least 2 vertices, got n={self.n}")
        canon = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) outside 0..{self.n - 1}")
            if not self.directed and i > j:
                i, j = j, i
            canon.add((i, j))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], directed: bool = False) -> "Graph":
        return cls(n, tuple(edges), directed)

    @classmethod
    def empty(cls, n: int, directed: bool = False) -> "Graph":
        return cls(n, (), directed)

    @classmethod
    def complete(cls, n: int, directed: bool = False) -> "Graph":
        if directed:
            return cls(n, tuple((i, j) for i in range(n) for j in range(n) if i != j), True)
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)), False)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Boolean matrix with ``A[i, j]`` true iff ``i`` sends to ``j``."""
        a = np.zeros((self.n, self.n), dtype=bool)
        if self.edges:
            idx = np.asarray(self.edges)
            a[idx[:, 0], idx[:, 1]] = True
            if not self.directed:
                a[idx[:, 1], idx[:, 0]] = True
        a.setflags(write=False)
        return a

    def neighbors(self, i: int) -> list[int]:
        """Undirected neighbors, or out-neighbors for a digraph."""
        return np.flatnonzero(self.adjacency[i]).tolist()

    def in_neighbors(self, i: int) -> list[int]:
        return np.flatnonzero(self.adjacency[:, i]).tolist()

    @property
    def degrees(self) -> np.ndarray:
        """Degree (undirected) or out-degree (directed) of every vertex."""
        return self.adjacency.sum(axis=1)

    def out_degree(self, i: int) -> int:
        return int(self.adjacency[i].sum())

    def to_text(self) -> str:
        kind = "directed" if self.directed else "undirected"
        lines = [f"n {self.n} {kind}"]
        lines += [f"{i} {j}" for i, j in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if len(head) != 3 or head[0] != "n" or head[2] not in ("directed", "undirected"):
            raise ValueError(f"bad edge-list header: {lines[0]!r}")
        edges = []
        for ln in lines[1:]:
            i, j = ln.split()
            edges.append((int(i), int(j)))
        return cls(int(head[1]), tuple(edges), head[2] == "directed")


def default_radius(n: int) -> float:
    return float(np.sqrt(10.0 * np.log(n) / n))


def _rgg_edges(points: np.ndarray, radius: float) -> list[tuple[int, int]]:
    d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    ii, jj = np.nonzero(np.triu(d <= radius, k=1))
    return list(zip(ii.tolist(), jj.tolist()))


def make_rgg(n: int, radius: float, seed) -> Graph:
    """Random geometric graph on ``n`` uniform points in the unit square.

    The result may be disconnected; use :func:`make_connected_rgg` to
    resample until it is not.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    rng = np.random.default_rng(seed)
    return Graph(n, tuple(_rgg_edges(rng.random((n, 2)), radius)))


def make_connected_rgg(n: int, radius: float, seed, max_tries: int = 10_000) -> Graph:
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        g = Graph(n, tuple(_rgg_edges(rng.random((n, 2)), radius)))
        if is_connected(g):
            return g
    raise RuntimeError(f"no connected RGG with n={n}, radius={radius} in {max_tries} tries")


def make_directed_rgg(n: int, radius: float, seed, delete_prob: float = 0.3,
                      max_tries: int = 10_000) -> Graph:
    """Strongly connected digraph obtained by thinning a connected RGG.

    Each direction of every undirected edge is dropped independently with
    probability ``delete_prob``; samples that are not strongly connected
    are rejected.
    """
    if not 0 <= delete_prob < 1:
        raise ValueError("delete_prob must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        base = Graph(n, tuple(_rgg_edges(rng.random((n, 2)), radius)))
        if not is_connected(base):
            continue
        arcs = [(i, j) for i, j in base.edges] + [(j, i) for i, j in base.edges]
        keep = rng.random(len(arcs)) >= delete_prob
        g = Graph(n, tuple(a for a, k in zip(arcs, keep) if k), directed=True)
        if is_strongly_connected(g):
            return g
    raise RuntimeError(f"no strongly connected digraph found in {max_tries} tries")


def _components(g: Graph, connection: str) -> int:
    ncomp, _ = connected_components(csr_matrix(g.adjacency), directed=True, connection=connection)
    return ncomp


def is_connected(g: Graph) -> bool:
    if g.directed:
        raise ValueError("is_connected expects an undirected graph; use is_strongly_connected")
    return _components(g, "weak") == 1


def is_strongly_connected(g: Graph) -> bool:
    if not g.directed:
        raise ValueError("is_strongly_connected expects a directed graph")
    return _components(g, "strong") == 1


def union_graph(gs: Sequence[Graph]) -> Graph:
    if not gs:
        raise ValueError("union of an empty sequence")
    n, directed = gs[0].n, gs[0].directed
    edges = set()
    for g in gs:
        if g.n != n or g.directed != directed:
            raise ValueError("graphs in a union must share n and directedness")
        edges.update(g.edges)
    return Graph(n, tuple(edges), directed)


def _jointly_connected(g: Graph) -> bool:
    return is_strongly_connected(g) if g.directed else is_connected(g)


def is_repeatedly_jointly_connected(gs: Sequence[Graph], r: int) -> bool:
    """Check every consecutive window of ``r`` graphs has a connected union."""
    if r < 1:
        raise ValueError("window length r must be >= 1")
    if len(gs) == 0 or len(gs) % r:
        raise ValueError(f"sequence length {len(gs)} is not a positive multiple of r={r}")
    return all(_jointly_connected(union_graph(gs[k:k + r])) for k in range(0, len(gs), r))


# --- schedules --------------------------------------------------------------

_GRAPH_STREAM = 0x6772


@dataclass(frozen=True)
class Static:
    graph: Graph

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def directed(self) -> bool:
        return self.graph.directed

    def sample(self, t: int) -> Graph:
        return self.graph


@dataclass(frozen=True)
class DynamicProbabilistic:
    """Each union edge is active at step ``t`` independently with probability ``p``."""

    union: Graph
    p: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError(f"activation probability must be in (0, 1], got {self.p}")
        ok = is_strongly_connected(self.union) if self.union.directed else is_connected(self.union)
        if not ok:
            raise ValueError("union graph of a dynamic schedule must be (strongly) connected")

    @property
    def n(self) -> int:
        return self.union.n

    @property
    def directed(self) -> bool:
        return self.union.directed

    def active_mask(self, t: int) -> np.ndarray:
        if self.p == 1:
            return np.ones(len(self.union.edges), dtype=bool)
        rng = np.random.default_rng([_GRAPH_STREAM, int(self.seed), int(t)])
        return rng.random(len(self.union.edges)) < self.p

    def sample(self, t: int) -> Graph:
        mask = self.active_mask(t)
        edges = tuple(e for e, on in zip(self.union.edges, mask) if on)
        return Graph(self.union.n, edges, self.union.directed)


@dataclass(frozen=True)
class Explicit:
    graphs: tuple[Graph, ...]

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if not self.graphs:
            raise ValueError("explicit schedule needs at least one graph")
        g0 = self.graphs[0]
        if any(g.n != g0.n or g.directed != g0.directed for g in self.graphs):
            raise ValueError("explicit schedule graphs must share n and directedness")

    @property
    def n(self) -> int:
        return self.graphs[0].n

    @property
    def directed(self) -> bool:
        return self.graphs[0].directed

    def sample(self, t: int) -> Graph:
        if not 1 <= t <= len(self.graphs):
            raise IndexError(f"step {t} outside explicit schedule of length {len(self.graphs)}")
        return self.graphs[t - 1]


TopologySchedule = Static | DynamicProbabilistic | Explicit


def sample_graph(schedule: TopologySchedule, t: int) -> Graph:
    """Neighbor graph in effect at step ``t`` (1-based)."""
    if t < 1:
        raise ValueError("steps are numbered from 1")
    return schedule.sample(t)
