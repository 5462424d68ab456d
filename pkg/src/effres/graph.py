"""Undirected multigraph storage with adjacency-list query access.

The only ways estimation code may look at a graph are the three query
primitives of the adjacency-list model:

* ``degree(v)``       -- number of incident edge endpoints,
* ``neighbor(v, i)``  -- the i-th entry of v's (sorted) neighbor list,
* ``sample_vertex()`` -- a uniformly random vertex id,

plus knowledge of ``n`` and ``m``.  Every call is counted in
:class:`AccessStats` so estimators can report exactly how much of the
graph they touched.

Graphs are immutable after construction.  Parallel edges are first-class
(they arise from vertex contraction and matter for spanning-tree counts);
self-loops are always removed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

import numpy as np

__all__ = [
    "AccessStats",
    "Graph",
    "GraphParseError",
    "load_edge_list",
    "read_cache",
    "write_cache",
]

_CACHE_MAGIC = b"RSTG1"


class GraphParseError(ValueError):
    """Raised for malformed edge-list input; carries the offending line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass
class AccessStats:
    """Counters for the three query types of the adjacency-list model.

    Counters only grow while an estimator runs; ``reset`` zeroes them
    between queries.  Totals are correct at quiescence; increments happen
    in bulk per walk batch, so concurrent batch runners never lose counts.
    """

    degree_queries: int = 0
    neighbor_queries: int = 0
    vertex_samples: int = 0

    def reset(self) -> None:
        self.degree_queries = 0
        self.neighbor_queries = 0
        self.vertex_samples = 0

    def snapshot(self) -> "AccessStats":
        return AccessStats(
            self.degree_queries, self.neighbor_queries, self.vertex_samples
        )

    def __sub__(self, other: "AccessStats") -> "AccessStats":
        return AccessStats(
            self.degree_queries - other.degree_queries,
            self.neighbor_queries - other.neighbor_queries,
            self.vertex_samples - other.vertex_samples,
        )

    def __iadd__(self, other: "AccessStats") -> "AccessStats":
        self.degree_queries += other.degree_queries
        self.neighbor_queries += other.neighbor_queries
        self.vertex_samples += other.vertex_samples
        return self

    def total(self) -> int:
        return self.degree_queries + self.neighbor_queries + self.vertex_samples


class Graph:
    """Immutable undirected multigraph in CSR form.

    ``_offsets[v] : _offsets[v + 1]`` indexes into ``_targets`` and holds
    v's neighbor list, sorted ascending; a parallel edge appears as a
    repeated entry.  ``m`` counts each undirected edge once, so
    ``sum(degree) == 2 * m``.
    """

    __slots__ = (
        "n",
        "m",
        "_offsets",
        "_targets",
        "connected_flag",
        "original_ids",
        "stats",
        "_spectrum",
    )

    def __init__(
        self,
        offsets: np.ndarray,
        targets: np.ndarray,
        *,
        connected: bool,
        original_ids: np.ndarray | None = None,
        stats: AccessStats | None = None,
    ):
        self.n = int(offsets.shape[0] - 1)
        if targets.shape[0] % 2 != 0:
            raise ValueError("neighbor lists must pair up (2 endpoints per edge)")
        self.m = int(targets.shape[0] // 2)
        self._offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        self._targets = np.ascontiguousarray(targets, dtype=np.int32)
        self._offsets.setflags(write=False)
        self._targets.setflags(write=False)
        self.connected_flag = bool(connected)
        if original_ids is None:
            original_ids = np.arange(self.n, dtype=np.int64)
        self.original_ids = np.asarray(original_ids, dtype=np.int64)
        self.stats = stats if stats is not None else AccessStats()
        self._spectrum = None

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]] | np.ndarray,
        *,
        original_ids: np.ndarray | None = None,
    ) -> "Graph":
        """Build a graph from an (m, 2) edge array over vertex ids 0..n-1.

        Self-loops are dropped.  Duplicate rows are kept as parallel
        edges; deduplicate beforehand if a simple graph is wanted.
        """
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges)
        e = e.reshape(-1, 2).astype(np.int64, copy=False)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        offsets, targets = _build_csr(n, e)
        connected = _is_connected(offsets, targets, n)
        return cls(
            offsets, targets, connected=connected, original_ids=original_ids
        )

    def fork_stats(self) -> "Graph":
        """Same graph, fresh counters.  Shares the CSR arrays.

        Used for per-query isolation when several queries run concurrently.
        """
        g = Graph.__new__(Graph)
        g.n = self.n
        g.m = self.m
        g._offsets = self._offsets
        g._targets = self._targets
        g.connected_flag = self.connected_flag
        g.original_ids = self.original_ids
        g.stats = AccessStats()
        g._spectrum = self._spectrum
        return g

    # ------------------------------------------------------------------
    # the adjacency-list query model
    # ------------------------------------------------------------------

    def degree(self, v: int | np.ndarray) -> int | np.ndarray:
        """Degree query.  Accepts a vertex id or an array of them."""
        if isinstance(v, np.ndarray):
            if v.size and (v.min() < 0 or v.max() >= self.n):
                raise IndexError("vertex id out of range")
            self.stats.degree_queries += int(v.size)
            return (self._offsets[v + 1] - self._offsets[v]).astype(np.int64)
        if not 0 <= v < self.n:
            raise IndexError(f"vertex id {v} out of range for n={self.n}")
        self.stats.degree_queries += 1
        return int(self._offsets[v + 1] - self._offsets[v])

    def neighbor(self, v: int, i: int) -> int:
        """Neighbor query: the i-th entry of v's sorted neighbor list."""
        if not 0 <= v < self.n:
            raise IndexError(f"vertex id {v} out of range for n={self.n}")
        base = self._offsets[v]
        if not 0 <= i < self._offsets[v + 1] - base:
            raise IndexError(f"neighbor index {i} out of range for vertex {v}")
        self.stats.neighbor_queries += 1
        return int(self._targets[base + i])

    def sample_vertex(
        self, rng: np.random.Generator, size: int | None = None
    ) -> int | np.ndarray:
        """Uniform vertex sample(s).  ``size=None`` returns a single id."""
        if size is None:
            self.stats.vertex_samples += 1
            return int(rng.integers(0, self.n))
        self.stats.vertex_samples += int(size)
        return rng.integers(0, self.n, size=size, dtype=np.int64)

    # ------------------------------------------------------------------
    # structural operations
    # ------------------------------------------------------------------

    def contract_pair(self, s: int, t: int) -> "Graph":
        """Identify ``s`` and ``t`` into one vertex.

        Edges between s and t become self-loops and are removed; parallel
        edges created by the merge are kept, so the result is in general a
        multigraph with n-1 vertices and ``m - multiplicity(s, t)`` edges.
        The merged vertex inherits s's position in the id order; vertices
        above t shift down by one.
        """
        if s == t:
            raise ValueError("cannot contract a vertex with itself")
        if not (0 <= s < self.n and 0 <= t < self.n):
            raise IndexError("vertex id out of range")
        remap = np.arange(self.n, dtype=np.int64)
        remap[remap > t] -= 1
        remap[t] = remap[s]
        u, v = self._edge_array().T
        mu, mv = remap[u], remap[v]
        keep = mu != mv
        edges = np.stack([mu[keep], mv[keep]], axis=1)
        return Graph.from_edges(self.n - 1, edges)

    def neighbors_of(self, v: int) -> np.ndarray:
        """Whole neighbor list of ``v`` (counts deg(v) neighbor queries)."""
        if not 0 <= v < self.n:
            raise IndexError(f"vertex id {v} out of range for n={self.n}")
        lo, hi = self._offsets[v], self._offsets[v + 1]
        self.stats.neighbor_queries += int(hi - lo)
        return self._targets[lo:hi].astype(np.int64)

    def _edge_array(self) -> np.ndarray:
        """(m, 2) array of undirected edges, endpoints in (min, max) order.

        Internal: bypasses query counting (used by contraction, the dense
        oracle and benchmark edge sampling, never by estimators).
        """
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self._offsets))
        dst = self._targets.astype(np.int64)
        keep = src < dst
        return np.stack([src[keep], dst[keep]], axis=1)

    def degrees_array(self) -> np.ndarray:
        """All degrees at once, without touching the query counters.

        Internal helper for the dense oracle and loaders.
        """
        return np.diff(self._offsets)

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"Graph(n={self.n}, m={self.m}, "
            f"connected={self.connected_flag})"
        )


# ----------------------------------------------------------------------
# CSR assembly and connectivity
# ----------------------------------------------------------------------


def _build_csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sorted CSR from an (m, 2) edge array (both directions materialized)."""
    if edges.size == 0:
        return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int32)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    counts = np.bincount(src, minlength=n)
    np.cumsum(counts, out=offsets[1:])
    return offsets, dst.astype(np.int32)


def _is_connected(offsets: np.ndarray, targets: np.ndarray, n: int) -> bool:
    if n == 0:
        return False
    if n == 1:
        return True
    return _component_labels(offsets, targets, n).max() == 0


def _component_labels(offsets: np.ndarray, targets: np.ndarray, n: int) -> np.ndarray:
    """Connected-component label per vertex (labels are 0-based, arbitrary)."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    adj = csr_matrix(
        (np.ones(targets.shape[0], dtype=np.int8), targets, offsets), shape=(n, n)
    )
    _, labels = connected_components(adj, directed=False)
    return labels


# ----------------------------------------------------------------------
# loading
# ----------------------------------------------------------------------


def load_edge_list(
    source: IO[str] | str | Path,
    *,
    largest_component: bool = True,
    keep_multi: bool = False,
) -> Graph:
    """Parse a SNAP-style edge list into a :class:`Graph`.

    Lines starting with ``#`` are comments; data lines hold two
    whitespace-separated integer vertex ids.  Self-loops are dropped.
    Duplicate undirected edges are dropped unless ``keep_multi`` is set.
    With ``largest_component`` (default) the result is the largest
    connected component, ties broken by the smallest raw id contained.
    Vertex ids are remapped to 0..n-1 in increasing raw-id order, with the
    raw ids kept in ``Graph.original_ids``.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_edge_list(
                fh, largest_component=largest_component, keep_multi=keep_multi
            )

    raw_u: list[int] = []
    raw_v: list[int] = []
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise GraphParseError(
                f"expected two vertex ids, got {len(parts)} fields", lineno
            )
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"non-integer vertex id in {parts!r}", lineno) from None
        raw_u.append(u)
        raw_v.append(v)

    if not raw_u:
        raise ValueError("empty graph: no edges in input")

    u = np.asarray(raw_u, dtype=np.int64)
    v = np.asarray(raw_v, dtype=np.int64)
    keep = u != v
    u, v = u[keep], v[keep]
    if u.size == 0:
        raise ValueError("empty graph: only self-loops in input")

    raw_ids = np.unique(np.concatenate([u, v]))
    u = np.searchsorted(raw_ids, u)
    v = np.searchsorted(raw_ids, v)
    n = raw_ids.shape[0]

    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    edges = np.stack([lo, hi], axis=1)
    if not keep_multi:
        edges = np.unique(edges, axis=0)

    offsets, targets = _build_csr(n, edges)
    if largest_component:
        labels = _component_labels(offsets, targets, n)
        sizes = np.bincount(labels)
        best = np.flatnonzero(sizes == sizes.max())
        if best.size > 1:
            # tie: pick the component containing the smallest raw id
            first_label_of = labels[np.argsort(raw_ids, kind="stable")]
            for lab in first_label_of:
                if lab in best:
                    chosen = lab
                    break
        else:
            chosen = best[0]
        member = labels == chosen
        if not member.all():
            new_id = np.cumsum(member) - 1
            keep_e = member[edges[:, 0]]
            edges = np.stack(
                [new_id[edges[keep_e, 0]], new_id[edges[keep_e, 1]]], axis=1
            )
            raw_ids = raw_ids[member]
            n = int(member.sum())
            offsets, targets = _build_csr(n, edges)
        connected = True
    else:
        connected = _is_connected(offsets, targets, n)

    return Graph(offsets, targets, connected=connected, original_ids=raw_ids)


# ----------------------------------------------------------------------
# binary cache ("RSTG1"): magic, u64 n, u64 m, u64 offsets[n+1],
# u64 targets[2m], u64 original_ids[n], u8 connected.  Little-endian.
# ----------------------------------------------------------------------


def write_cache(g: Graph, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<QQ", g.n, g.m))
        fh.write(g._offsets.astype("<u8").tobytes())
        fh.write(g._targets.astype("<u8").tobytes())
        fh.write(g.original_ids.astype("<u8").tobytes())
        fh.write(struct.pack("<B", 1 if g.connected_flag else 0))


def read_cache(path: str | Path) -> Graph:
    with open(path, "rb") as fh:
        magic = fh.read(len(_CACHE_MAGIC))
        if magic != _CACHE_MAGIC:
            raise ValueError(f"not a graph cache file (bad magic {magic!r})")
        n, m = struct.unpack("<QQ", fh.read(16))
        offsets = np.frombuffer(fh.read(8 * (n + 1)), dtype="<u8").astype(np.int64)
        targets = np.frombuffer(fh.read(8 * 2 * m), dtype="<u8").astype(np.int32)
        original = np.frombuffer(fh.read(8 * n), dtype="<u8").astype(np.int64)
        (connected,) = struct.unpack("<B", fh.read(1))
    return Graph(
        offsets, targets, connected=bool(connected), original_ids=original
    )
