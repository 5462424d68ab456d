"""Shared graph builders and the query-model facade used across tests."""

from __future__ import annotations

import numpy as np

from effres.graph import AccessStats, Graph


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i + 1) for i in range(leaves)])


def c5_with_chord() -> Graph:
    return Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])


def two_parallel_edges() -> Graph:
    return Graph.from_edges(2, [(0, 1), (0, 1)])


def gnp(n: int, p: float, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    upper = np.triu(mask, k=1)
    u, v = np.nonzero(upper)
    return Graph.from_edges(n, np.stack([u, v], axis=1))


def random_connected(n: int, p: float, seed: int) -> Graph:
    for attempt in range(200):
        g = gnp(n, p, seed * 1000 + attempt)
        if g.connected_flag:
            return g
    raise RuntimeError("no connected sample found")


def sparse_random_lcc(n: int, avg_degree: float, seed: int) -> Graph:
    """Largest component of a sparse random graph with ~n*avg_degree/2 edges."""
    rng = np.random.default_rng(seed)
    m_target = int(n * avg_degree / 2)
    e = rng.integers(0, n, size=(int(m_target * 1.15), 2), dtype=np.int64)
    e = e[e[:, 0] != e[:, 1]]
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    e = np.unique(np.stack([lo, hi], axis=1), axis=0)
    rng.shuffle(e)
    e = e[:m_target]
    g = Graph.from_edges(n, e)
    if g.connected_flag:
        return g
    from effres.graph import _component_labels

    labels = _component_labels(g._offsets, g._targets, g.n)
    biggest = np.argmax(np.bincount(labels))
    member = labels == biggest
    new_id = np.cumsum(member) - 1
    keep = member[e[:, 0]] & member[e[:, 1]]
    e2 = np.stack([new_id[e[keep, 0]], new_id[e[keep, 1]]], axis=1)
    return Graph.from_edges(int(member.sum()), e2)


class QueryOnlyGraph:
    """A graph facade exposing nothing but the adjacency-list query model.

    Estimators must work against this object; anything they try beyond
    degree / neighbor / sample_vertex (plus n, m and contraction) raises
    AttributeError.
    """

    def __init__(self, g: Graph):
        self._g = g.fork_stats()
        self.n = g.n
        self.m = g.m
        self.stats = AccessStats()

    def degree(self, v):
        if isinstance(v, np.ndarray):
            self.stats.degree_queries += int(v.size)
            return self._g._offsets[v + 1] - self._g._offsets[v]
        self.stats.degree_queries += 1
        if not 0 <= v < self.n:
            raise IndexError(v)
        return int(self._g._offsets[v + 1] - self._g._offsets[v])

    def neighbor(self, v, i):
        self.stats.neighbor_queries += 1
        base = self._g._offsets[v]
        if not 0 <= i < self._g._offsets[v + 1] - base:
            raise IndexError(i)
        return int(self._g._targets[base + i])

    def sample_vertex(self, rng, size=None):
        if size is None:
            self.stats.vertex_samples += 1
            return int(rng.integers(0, self.n))
        self.stats.vertex_samples += int(size)
        return rng.integers(0, self.n, size=size, dtype=np.int64)

    def contract_pair(self, s, t):
        return QueryOnlyGraph(self._g.contract_pair(s, t))
