"""Numba walk kernels.

All randomness is counter-based: walk ``w`` of a batch seeded with
``seed`` draws its j-th variate as ``mix64(mix64(seed + PHI*(w+1)) +
PHI*(j+1))`` mapped to [0, 1).  The pure-Python engine in
:mod:`effres.walker` replays the exact same streams, so kernel and
fallback paths produce bit-identical tallies, and results never depend
on batch partitioning.

Kernels come in two memory layouts: walk-major with a 4-way unrolled
loop (fastest when the CSR arrays sit in cache, i.e. small graphs) and
step-major over a sliding window of active walks (hides memory latency
on large graphs).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_PHI = np.uint64(0x9E3779B97F4A7C15)
_INV53 = 2.0**-53
_U1 = np.uint64(1)

# walk outcome codes shared with effres.walker
HIT = 1
MISS = 0
CAPPED = 2


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def _walk_key(seed, w):
    return _mix64(np.uint64(seed) + _PHI * (np.uint64(w) + _U1))


@njit(cache=True, nogil=True, inline="always")
def _to_unit(z):
    return (z >> np.uint64(11)) * _INV53


@njit(cache=True, nogil=True)
def fixed_tally(offsets, targets, start, length, walks, seed, counts):
    """Endpoint tally of fixed-length simple walks; counts has shape (n,)."""
    w = 0
    while w + 4 <= walks:
        s0 = _walk_key(seed, w)
        s1 = _walk_key(seed, w + 1)
        s2 = _walk_key(seed, w + 2)
        s3 = _walk_key(seed, w + 3)
        c0 = start
        c1 = start
        c2 = start
        c3 = start
        for _ in range(length):
            s0 += _PHI
            s1 += _PHI
            s2 += _PHI
            s3 += _PHI
            z0 = _mix64(s0)
            z1 = _mix64(s1)
            z2 = _mix64(s2)
            z3 = _mix64(s3)
            b0 = offsets[c0]
            b1 = offsets[c1]
            b2 = offsets[c2]
            b3 = offsets[c3]
            d0 = offsets[c0 + 1] - b0
            d1 = offsets[c1 + 1] - b1
            d2 = offsets[c2 + 1] - b2
            d3 = offsets[c3 + 1] - b3
            c0 = targets[b0 + np.int64(_to_unit(z0) * np.float64(d0))]
            c1 = targets[b1 + np.int64(_to_unit(z1) * np.float64(d1))]
            c2 = targets[b2 + np.int64(_to_unit(z2) * np.float64(d2))]
            c3 = targets[b3 + np.int64(_to_unit(z3) * np.float64(d3))]
        counts[c0] += 1
        counts[c1] += 1
        counts[c2] += 1
        counts[c3] += 1
        w += 4
    while w < walks:
        st = _walk_key(seed, w)
        cur = start
        for _ in range(length):
            st += _PHI
            z = _mix64(st)
            base = offsets[cur]
            d = offsets[cur + 1] - base
            cur = targets[base + np.int64(_to_unit(z) * np.float64(d))]
        counts[cur] += 1
        w += 1


@njit(cache=True, nogil=True)
def fixed_tally_lazy(offsets, targets, start, length, walks, seed, counts):
    """Lazy variant of :func:`fixed_tally`; returns total move count.

    One variate per step decides both the stay/move coin and the
    neighbor: u < 1/2 stays, otherwise 2(u - 1/2) is again uniform on
    [0, 1) and picks the neighbor.
    """
    moves = 0
    for w in range(walks):
        st = _walk_key(seed, w)
        cur = start
        for _ in range(length):
            st += _PHI
            u = _to_unit(_mix64(st))
            if u >= 0.5:
                base = offsets[cur]
                d = offsets[cur + 1] - base
                cur = targets[base + np.int64((u - 0.5) * 2.0 * np.float64(d))]
                moves += 1
        counts[cur] += 1
    return moves


@njit(cache=True, nogil=True)
def fixed_endpoints(offsets, targets, start, length, walks, seed, out):
    """Per-walk endpoints of fixed-length simple walks (step-major).

    Step-major order keeps many independent loads in flight, which is
    what limits throughput once the CSR arrays fall out of cache.
    """
    state = np.empty(walks, np.uint64)
    for w in range(walks):
        state[w] = _walk_key(seed, w)
        out[w] = start
    for _ in range(length):
        for w in range(walks):
            state[w] += _PHI
            z = _mix64(state[w])
            cur = out[w]
            base = offsets[cur]
            d = offsets[cur + 1] - base
            out[w] = targets[base + np.int64(_to_unit(z) * np.float64(d))]


@njit(cache=True, nogil=True)
def stop_walks(offsets, targets, s, t, mode, walks, cap, seed, out_flag, out_steps):
    """Open-ended walks from ``s`` with one of two stopping rules.

    mode 0 (round trip): stop at the first return to ``s``; HIT when ``t``
    was visited first.  mode 1 (first visit): stop at the first arrival at
    ``t``; HIT when that arrival steps directly from ``s``.  Walks still
    running at ``cap`` steps stop with CAPPED.

    Active walks are processed step-major through a fixed window of
    slots, compacting finished walks out, so the graph loads of many
    walks overlap.
    """
    window = 4096
    if walks < window:
        window = walks
    pos = np.empty(window, np.int64)
    state = np.empty(window, np.uint64)
    steps = np.empty(window, np.int64)
    seen = np.empty(window, np.uint8)
    wid = np.empty(window, np.int64)

    next_w = 0
    nact = 0
    done = 0
    total_steps = 0
    while done < walks:
        while nact < window and next_w < walks:
            state[nact] = _walk_key(seed, next_w)
            pos[nact] = s
            steps[nact] = 0
            seen[nact] = 0
            wid[nact] = next_w
            next_w += 1
            nact += 1
        k = 0
        for a in range(nact):
            state[a] += _PHI
            z = _mix64(state[a])
            cur = pos[a]
            base = offsets[cur]
            d = offsets[cur + 1] - base
            nxt = targets[base + np.int64(_to_unit(z) * np.float64(d))]
            stp = steps[a] + 1
            total_steps += 1
            finished = False
            if mode == 0:
                if nxt == t:
                    seen[a] = 1
                if nxt == s:
                    out_flag[wid[a]] = HIT if seen[a] == 1 else MISS
                    out_steps[wid[a]] = stp
                    finished = True
            else:
                if nxt == t:
                    out_flag[wid[a]] = HIT if cur == s else MISS
                    out_steps[wid[a]] = stp
                    finished = True
            if not finished and stp >= cap:
                out_flag[wid[a]] = CAPPED
                out_steps[wid[a]] = stp
                finished = True
            if finished:
                done += 1
            else:
                pos[k] = nxt
                state[k] = state[a]
                steps[k] = stp
                seen[k] = seen[a]
                wid[k] = wid[a]
                k += 1
        nact = k
    return total_steps


@njit(cache=True, nogil=True)
def lazy_return_hits(offsets, targets, starts, lengths, seed, out_hit):
    """For each i: lazy walk of lengths[i] steps from starts[i]; record
    whether it ends where it started.  Returns total move count."""
    moves = 0
    for w in range(starts.shape[0]):
        st = _walk_key(seed, w)
        cur = starts[w]
        for _ in range(lengths[w]):
            st += _PHI
            u = _to_unit(_mix64(st))
            if u >= 0.5:
                base = offsets[cur]
                d = offsets[cur + 1] - base
                cur = targets[base + np.int64((u - 0.5) * 2.0 * np.float64(d))]
                moves += 1
        out_hit[w] = 1 if cur == starts[w] else 0
    return moves
