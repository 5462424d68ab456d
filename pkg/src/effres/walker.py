"""Random-walk engines.

This is the only code that touches a graph while an estimator runs, and
it does so exclusively through the adjacency-list query model (degree,
i-th neighbor, uniform vertex sample).  Fixed-length batches, round-trip
walks and first-visit walks all seed every walk from ``(batch seed, walk
index)``, so batches are reproducible and independent of how the work is
scheduled or partitioned.

Two execution paths produce bit-identical results: compiled kernels
(:mod:`effres._kernels`) for native :class:`~effres.graph.Graph`
instances, and a plain-Python replay of the same per-walk streams for
any other object that implements the query model (used to enforce that
estimators need nothing beyond it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import _kernels
from .graph import Graph

__all__ = [
    "WalkBatchResult",
    "StopWalkSummary",
    "WalkStop",
    "WalkStream",
    "batch_endpoints",
    "simple_walk",
    "lazy_walk",
    "walk_until",
    "round_trip_walks",
    "first_visit_walks",
    "lazy_return_walks",
]

_MASK = (1 << 64) - 1
_PHI = 0x9E3779B97F4A7C15
_SMALL_N = 4096  # below this the CSR arrays are cache-resident; walk-major wins

HIT = _kernels.HIT
MISS = _kernels.MISS
CAPPED = _kernels.CAPPED


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class WalkStream:
    """Pure-Python replay of one walk's variate stream.

    Stream ``w`` under ``seed`` yields exactly the variates the compiled
    kernels consume for that walk.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int, walk_index: int):
        self._state = _mix64((seed + _PHI * (walk_index + 1)) & _MASK)

    def random(self) -> float:
        self._state = (self._state + _PHI) & _MASK
        return (_mix64(self._state) >> 11) * 2.0**-53


def _batch_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63))


def _is_native(g: Any) -> bool:
    return isinstance(g, Graph)


@dataclass
class WalkBatchResult:
    """Endpoint tallies from a batch of equal-length walks.

    ``endpoint_counts`` maps endpoint vertex to the number of walks that
    ended there; the counts sum to ``walks``.  ``total_steps`` is
    ``walks * length`` for these fixed-length batches.
    """

    endpoint_counts: dict[int, int]
    walks: int
    length: int
    total_steps: int

    def count(self, v: int) -> int:
        return self.endpoint_counts.get(v, 0)


@dataclass
class StopWalkSummary:
    """Outcome tallies from a batch of predicate-stopped walks."""

    hits: int
    misses: int
    capped: int
    total_steps: int

    @property
    def walks(self) -> int:
        return self.hits + self.misses + self.capped


@dataclass
class WalkStop:
    """Result of a single predicate-stopped walk."""

    stopped: bool
    steps: int
    hit_info: Any = None


# ----------------------------------------------------------------------
# single walks (driven directly by a numpy Generator)
# ----------------------------------------------------------------------


def _step(g, cur: int, rng) -> int:
    d = g.degree(cur)
    if d == 0:
        raise ValueError(f"vertex {cur} is isolated; walks require min degree >= 1")
    return g.neighbor(cur, int(rng.random() * d))


def simple_walk(g, start: int, length: int, rng: np.random.Generator) -> int:
    """Endpoint of a simple random walk of ``length`` steps from ``start``.

    Consumes exactly ``length`` degree queries and ``length`` neighbor
    queries.
    """
    cur = start
    for _ in range(length):
        cur = _step(g, cur, rng)
    return cur


def lazy_walk(g, start: int, length: int, rng: np.random.Generator) -> int:
    """Like :func:`simple_walk` but each step stays put with probability 1/2."""
    cur = start
    for _ in range(length):
        u = rng.random()
        if u >= 0.5:
            d = g.degree(cur)
            if d == 0:
                raise ValueError(
                    f"vertex {cur} is isolated; walks require min degree >= 1"
                )
            # 2(u - 1/2) is uniform on [0, 1) again given that we move
            cur = g.neighbor(cur, int((u - 0.5) * 2.0 * d))
    return cur


def walk_until(
    g,
    start: int,
    stop: Callable[[int, int, int], Any],
    cap: int,
    rng,
) -> WalkStop:
    """Walk until ``stop(previous, current, step)`` returns truthy.

    The predicate sees the traversed edge (previous and current vertex)
    after every transition; its return value is kept as ``hit_info``.
    The cap turns non-termination into a ``stopped=False`` outcome.
    ``rng`` may be a numpy Generator or any object with ``random()``.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    cur = start
    for step in range(1, cap + 1):
        prev = cur
        cur = _step(g, cur, rng)
        info = stop(prev, cur, step)
        if info:
            return WalkStop(True, step, info)
    return WalkStop(False, cap, None)


# ----------------------------------------------------------------------
# fixed-length batches
# ----------------------------------------------------------------------


def batch_endpoints(
    g,
    start: int,
    length: int,
    walks: int,
    rng: np.random.Generator,
    *,
    lazy: bool = False,
) -> WalkBatchResult:
    """Endpoint tallies of ``walks`` independent length-``length`` walks.

    Simple batches consume exactly ``walks * length`` neighbor and degree
    queries; lazy batches consume one of each per move.
    """
    if walks < 1:
        raise ValueError("walks must be >= 1")
    if not 0 <= start < g.n:
        raise IndexError(f"start vertex {start} out of range")
    if length == 0:
        # a length-0 walk ends at its start with certainty; no queries
        return WalkBatchResult({start: walks}, walks, 0, 0)
    seed = _batch_seed(rng)
    if _is_native(g):
        counts = _native_fixed(g, start, length, walks, seed, lazy)
    else:
        counts = _generic_fixed(g, start, length, walks, seed, lazy)
    return WalkBatchResult(counts, walks, length, walks * length)


def _native_fixed(
    g: Graph, start: int, length: int, walks: int, seed: int, lazy: bool
) -> dict[int, int]:
    if lazy:
        counts = np.zeros(g.n, np.int64)
        moves = _kernels.fixed_tally_lazy(
            g._offsets, g._targets, start, length, walks, seed, counts
        )
        g.stats.degree_queries += int(moves)
        g.stats.neighbor_queries += int(moves)
    elif g.n <= _SMALL_N:
        counts = np.zeros(g.n, np.int64)
        _kernels.fixed_tally(
            g._offsets, g._targets, start, length, walks, seed, counts
        )
        g.stats.degree_queries += walks * length
        g.stats.neighbor_queries += walks * length
    else:
        ends = np.empty(walks, np.int64)
        _kernels.fixed_endpoints(
            g._offsets, g._targets, start, length, walks, seed, ends
        )
        g.stats.degree_queries += walks * length
        g.stats.neighbor_queries += walks * length
        vals, cnts = np.unique(ends, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnts)}
    hit = np.nonzero(counts)[0]
    return {int(v): int(counts[v]) for v in hit}


def _generic_fixed(
    g, start: int, length: int, walks: int, seed: int, lazy: bool
) -> dict[int, int]:
    counts: dict[int, int] = {}
    for w in range(walks):
        stream = WalkStream(seed, w)
        cur = start
        for _ in range(length):
            u = stream.random()
            if lazy:
                if u < 0.5:
                    continue
                u = (u - 0.5) * 2.0
            d = g.degree(cur)
            if d == 0:
                raise ValueError(
                    f"vertex {cur} is isolated; walks require min degree >= 1"
                )
            cur = g.neighbor(cur, int(u * float(d)))
        counts[cur] = counts.get(cur, 0) + 1
    return dict(sorted(counts.items()))


# ----------------------------------------------------------------------
# predicate-stopped batches (the two stopping rules of the commute-time
# and edge-crossing estimators)
# ----------------------------------------------------------------------


def round_trip_walks(
    g, s: int, t: int, walks: int, cap: int, rng: np.random.Generator
) -> StopWalkSummary:
    """Walks from ``s`` stopped at the first return to ``s``.

    A walk is a hit when it visited ``t`` before that return.
    """
    return _stopped_batch(g, s, t, 0, walks, cap, rng)


def first_visit_walks(
    g, s: int, t: int, walks: int, cap: int, rng: np.random.Generator
) -> StopWalkSummary:
    """Walks from ``s`` stopped at the first arrival at ``t``.

    A walk is a hit when that first arrival steps directly from ``s``,
    i.e. traverses an (s, t) edge (any parallel one counts).
    """
    return _stopped_batch(g, s, t, 1, walks, cap, rng)


def _stopped_batch(
    g, s: int, t: int, mode: int, walks: int, cap: int, rng: np.random.Generator
) -> StopWalkSummary:
    if walks < 1:
        raise ValueError("walks must be >= 1")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    seed = _batch_seed(rng)
    if _is_native(g):
        flags = np.zeros(walks, np.int8)
        steps = np.zeros(walks, np.int64)
        total = _kernels.stop_walks(
            g._offsets, g._targets, s, t, mode, walks, cap, seed, flags, steps
        )
        g.stats.degree_queries += int(total)
        g.stats.neighbor_queries += int(total)
        hits = int(np.count_nonzero(flags == HIT))
        capped = int(np.count_nonzero(flags == CAPPED))
        return StopWalkSummary(hits, walks - hits - capped, capped, int(total))
    hits = misses = capped = total = 0
    for w in range(walks):
        stream = WalkStream(seed, w)
        cur = s
        seen = False
        outcome = CAPPED
        for step in range(1, cap + 1):
            prev = cur
            cur = _step(g, cur, stream)
            total += 1
            if mode == 0:
                if cur == t:
                    seen = True
                if cur == s:
                    outcome = HIT if seen else MISS
                    break
            else:
                if cur == t:
                    outcome = HIT if prev == s else MISS
                    break
        if outcome == HIT:
            hits += 1
        elif outcome == MISS:
            misses += 1
        else:
            capped += 1
    return StopWalkSummary(hits, misses, capped, total)


# ----------------------------------------------------------------------
# lazy return-probability batch (spanning-tree count estimator inner loop)
# ----------------------------------------------------------------------


def lazy_return_walks(
    g, starts: np.ndarray, lengths: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Run one lazy walk per (start, length) pair; flag walks that return.

    Returns a 0/1 array: entry i is 1 iff the i-th walk ends at its start.
    """
    starts = np.asarray(starts, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    if starts.shape != lengths.shape:
        raise ValueError("starts and lengths must have equal shape")
    seed = _batch_seed(rng)
    hit = np.zeros(starts.shape[0], np.int8)
    if _is_native(g):
        moves = _kernels.lazy_return_hits(
            g._offsets, g._targets, starts, lengths, seed, hit
        )
        g.stats.degree_queries += int(moves)
        g.stats.neighbor_queries += int(moves)
        return hit
    for w in range(starts.shape[0]):
        stream = WalkStream(seed, w)
        cur = int(starts[w])
        for _ in range(int(lengths[w])):
            u = stream.random()
            if u < 0.5:
                continue
            d = g.degree(cur)
            if d == 0:
                raise ValueError(
                    f"vertex {cur} is isolated; walks require min degree >= 1"
                )
            cur = g.neighbor(cur, int((u - 0.5) * 2.0 * float(d)))
        hit[w] = 1 if cur == int(starts[w]) else 0
    return hit
