"""Local estimators for s-t effective resistance.

Six estimators, all built on random walks and all reading the graph only
through the adjacency-list query model:

* :func:`est_tranprob` sums walk-endpoint transition-probability
  estimates over a spectral-gap-derived horizon (additive guarantee).
* :func:`est_tranprob_collision` replaces each endpoint probability by a
  collision estimate between half-length walks from both vertices.
* :func:`est_mc` counts round trips s -> t -> s (multiplicative
  guarantee when the resistance is below a threshold).
* :func:`est_mc2` (adjacent pairs only) counts walks whose first arrival
  at t crosses the (s, t) edge.
* :func:`app_num_st` estimates log(#spanning trees)/n from lazy-walk
  return probabilities; :func:`est_spantree` turns two such estimates
  (contracted graph over original graph) into a resistance estimate.
* :func:`median_boost` amplifies any of the above by taking the median
  of independent repeats.

Every sample-count formula lives in a small pure function so tests can
pin them; per-run resolved values are reported in
:attr:`Estimate.resolved`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import walker
from .graph import AccessStats, Graph

__all__ = [
    "EstimatorParams",
    "Overrides",
    "Estimate",
    "tranprob_schedule",
    "collision_walk_count",
    "round_trip_count",
    "first_visit_count",
    "tree_estimator_schedule",
    "default_beta_schedule",
    "default_step_cap",
    "est_tranprob",
    "est_tranprob_collision",
    "est_mc",
    "est_mc2",
    "app_num_st",
    "est_spantree",
    "median_boost",
]

_EULER_GAMMA = 0.5772156649015329
_EXACT_HARMONIC_LIMIT = 1 << 22


@dataclass(frozen=True)
class Overrides:
    """Explicit sample counts for desk-scale runs; None keeps the formula."""

    horizon: int | None = None  # number of walk lengths (tranprob family)
    walks: int | None = None  # walks per length (est_tranprob)
    walk_schedule: tuple[int, ...] | None = None  # per-length walks (collision)
    trip_walks: int | None = None  # round trips (est_mc)
    crossing_walks: int | None = None  # first-visit walks (est_mc2)
    tree_rounds: int | None = None  # length-range parameter (app_num_st)
    tree_iterations: int | None = None  # walk iterations (app_num_st)


@dataclass(frozen=True)
class EstimatorParams:
    """Knobs shared by all estimators.

    ``spectral_bound`` is the walk's spectral parameter (strictly inside
    (0, 1); the transition-probability estimators refuse periodic
    walks).  ``resistance_threshold`` is the regime boundary of the two
    stopped-walk estimators.  A guarantee silently degrades when the
    supplied spectral bound underestimates the true one.
    """

    epsilon: float = 0.1
    spectral_bound: float | None = None
    resistance_threshold: float = 0.1
    failure_prob: float = 1.0 / 3.0
    beta_schedule: tuple[float, ...] | None = None
    step_cap: int | None = None
    seed: int = 0
    overrides: Overrides = field(default_factory=Overrides)


@dataclass
class Estimate:
    """One estimator run: value, outcome, and what it cost."""

    value: float
    success: bool
    access: AccessStats
    elapsed_s: float
    params: EstimatorParams
    resolved: dict[str, Any]
    walks: int = 0
    successes: int = 0
    capped_walks: int = 0
    notes: tuple[str, ...] = ()


# ----------------------------------------------------------------------
# sample-count formulas (pure; pinned by golden tests)
# ----------------------------------------------------------------------


def _horizon(epsilon: float, spectral_bound: float) -> int:
    return math.ceil(
        math.log(4.0 / (epsilon * (1.0 - spectral_bound)))
        / math.log(1.0 / spectral_bound)
    )


def tranprob_schedule(epsilon: float, spectral_bound: float) -> tuple[int, int]:
    """(number of lengths, walks per length) for :func:`est_tranprob`."""
    horizon = max(1, _horizon(epsilon, spectral_bound))
    walks = math.ceil(40.0 * horizon**2 * math.log(80.0 * horizon) / epsilon**2)
    return horizon, walks


def collision_walk_count(horizon: int, beta: float, epsilon: float) -> int:
    """Walks for one length of :func:`est_tranprob_collision`."""
    lcube = float(horizon) ** 3
    return math.ceil(
        20000.0
        * (math.sqrt(lcube * beta / epsilon**2) + lcube * beta**1.5 / epsilon**2)
    )


def round_trip_count(epsilon: float, threshold: float, deg_s: int) -> int:
    """Round trips for :func:`est_mc`."""
    return math.ceil(3.0 * math.log(6.0) * threshold * deg_s / epsilon**2)


def first_visit_count(epsilon: float, threshold: float, failure_prob: float) -> int:
    """First-visit walks for :func:`est_mc2`."""
    return math.ceil(3.0 * math.log(1.0 / failure_prob) / (epsilon**2 * threshold))


def tree_estimator_schedule(
    epsilon: float,
    failure_prob: float,
    n: int,
    *,
    rounds: int | None = None,
    iterations: int | None = None,
) -> tuple[int, float, int, int]:
    """(rounds, weight norm, walk iterations, degree samples) for app_num_st.

    The weight norm is the harmonic sum over the walk-length range
    [1, 2*rounds), which also normalizes the length sampler, so an
    overridden ``rounds`` stays self-consistent.
    """
    if rounds is None:
        rounds = math.ceil(90.0**3 / epsilon**3)
    weight_norm = _harmonic(2 * rounds - 1)
    if iterations is None:
        iterations = math.ceil(
            8.0 * math.log(4.0 / failure_prob) * weight_norm**2 / epsilon**2
        )
    degree_samples = math.ceil(
        256.0 * math.log(1.0 / failure_prob) * math.log(n) ** 2 / epsilon**2
    )
    return rounds, weight_norm, iterations, degree_samples


def default_beta_schedule(
    spectral_bound: float, g, horizon: int
) -> tuple[float, ...]:
    """Valid second-moment bounds for walk-endpoint vectors.

    min(1, 1/(2m) + bound^(2i)) dominates ||1_v P^i D^(-1/2)||^2 for every
    start vertex: the stationary part contributes exactly 1/(2m) and the
    rest decays with the spectral bound.
    """
    if not 0.0 < spectral_bound < 1.0:
        raise ValueError("spectral bound must be strictly inside (0, 1)")
    floor = 1.0 / (2.0 * g.m)
    return tuple(
        min(1.0, floor + spectral_bound ** (2 * i)) for i in range(horizon)
    )


def default_step_cap(m: int, threshold: float) -> int:
    # ten times the worst-case expected walk length 2*m*max(threshold, 1)
    return math.ceil(20.0 * m * max(threshold, 1.0))


def _harmonic(k: int) -> float:
    if k <= 0:
        return 0.0
    if k <= _EXACT_HARMONIC_LIMIT:
        return float(np.sum(1.0 / np.arange(1, k + 1)))
    return math.log(k) + _EULER_GAMMA + 1.0 / (2.0 * k) - 1.0 / (12.0 * k * k)


# ----------------------------------------------------------------------
# shared plumbing
# ----------------------------------------------------------------------


def _resolve_rng(params: EstimatorParams, rng) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(params.seed)


def _require_pair(g, s: int, t: int) -> None:
    if s == t:
        raise ValueError("s and t must differ (resistance of a vertex to itself is 0)")
    if not (0 <= s < g.n and 0 <= t < g.n):
        raise IndexError("vertex id out of range")


def _require_spectral(params: EstimatorParams) -> float:
    bound = params.spectral_bound
    if bound is None:
        raise ValueError("spectral_bound is required for this estimator")
    if not 0.0 < bound < 1.0:
        raise ValueError(
            f"spectral_bound must be in (0, 1), got {bound}; "
            "1 means a periodic (bipartite) walk, which this estimator rejects"
        )
    if params.epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    return bound


class _Run:
    """Timer + access-diff bookkeeping for one estimator invocation."""

    def __init__(self, g, params: EstimatorParams):
        self.g = g
        self.params = params
        self.stats0 = g.stats.snapshot()
        self.t0 = time.perf_counter()

    def finish(self, value: float, resolved: dict[str, Any], **kw) -> Estimate:
        elapsed = time.perf_counter() - self.t0
        access = self.g.stats.snapshot() - self.stats0
        kw.setdefault("success", True)
        return Estimate(
            value=value,
            access=access,
            elapsed_s=elapsed,
            params=self.params,
            resolved=resolved,
            **kw,
        )


# ----------------------------------------------------------------------
# transition-probability estimators
# ----------------------------------------------------------------------


def est_tranprob(
    g, s: int, t: int, params: EstimatorParams, rng: np.random.Generator | None = None
) -> Estimate:
    """Additive-error estimate from endpoint tallies of fixed-length walks.

    For each length below the horizon, runs the same number of walks from
    s and from t and combines the four endpoint frequencies (at s and at
    t, degree-normalized) into one term of the resistance series.  With a
    valid spectral bound the error is at most epsilon with probability
    at least 9/10.
    """
    rng = _resolve_rng(params, rng)
    _require_pair(g, s, t)
    bound = _require_spectral(params)
    run = _Run(g, params)
    notes: list[str] = []

    ov = params.overrides
    raw_horizon = _horizon(params.epsilon, bound)
    horizon, walks = tranprob_schedule(params.epsilon, bound)
    if raw_horizon < 1:
        notes.append("horizon clamped to 1")
    if ov.horizon is not None:
        horizon = ov.horizon
    if ov.walks is not None:
        walks = ov.walks

    deg_s = g.degree(s)
    deg_t = g.degree(t)
    value = 0.0
    for length in range(horizon):
        from_s = walker.batch_endpoints(g, s, length, walks, rng)
        from_t = walker.batch_endpoints(g, t, length, walks, rng)
        value += (
            from_s.count(s) / (walks * deg_s)
            - from_s.count(t) / (walks * deg_t)
            - from_t.count(s) / (walks * deg_s)
            + from_t.count(t) / (walks * deg_t)
        )
    return run.finish(
        value,
        {"horizon": horizon, "walks_per_length": walks},
        walks=2 * walks * horizon,
        notes=tuple(notes),
    )


def est_tranprob_collision(
    g, s: int, t: int, params: EstimatorParams, rng: np.random.Generator | None = None
) -> Estimate:
    """Like :func:`est_tranprob`, but each series term is a collision count.

    For each length, two independent batches of half-length walks run
    from both vertices; endpoint vectors (frequencies scaled by
    1/sqrt(degree)) are dotted together.  Needs per-length second-moment
    bounds; see :func:`default_beta_schedule`.
    """
    rng = _resolve_rng(params, rng)
    _require_pair(g, s, t)
    bound = _require_spectral(params)
    run = _Run(g, params)
    notes: list[str] = []

    ov = params.overrides
    raw_horizon = _horizon(params.epsilon, bound)
    horizon = max(1, raw_horizon)
    if raw_horizon < 1:
        notes.append("horizon clamped to 1")
    if ov.horizon is not None:
        horizon = ov.horizon

    betas = params.beta_schedule
    if betas is None:
        betas = default_beta_schedule(bound, g, horizon)
    if len(betas) < horizon:
        raise ValueError(f"beta schedule has {len(betas)} entries, need {horizon}")
    if any(not 0.0 < b <= 1.0 for b in betas[:horizon]):
        raise ValueError("beta schedule entries must lie in (0, 1]")

    schedule = [
        collision_walk_count(horizon, betas[i], params.epsilon)
        for i in range(horizon)
    ]
    if ov.walk_schedule is not None:
        if len(ov.walk_schedule) < horizon:
            raise ValueError("walk_schedule override shorter than horizon")
        schedule = list(ov.walk_schedule[:horizon])

    value = 0.0
    total_walks = 0
    for length in range(horizon):
        r_i = schedule[length]
        total_walks += 4 * r_i
        first = (length + 1) // 2
        second = length // 2
        x_s = walker.batch_endpoints(g, s, first, r_i, rng)
        x_t = walker.batch_endpoints(g, t, first, r_i, rng)
        y_s = walker.batch_endpoints(g, s, second, r_i, rng)
        y_t = walker.batch_endpoints(g, t, second, r_i, rng)
        inv_deg = _support_inverse_degrees(g, (x_s, x_t, y_s, y_t))
        value += (
            _collision_dot(x_s, y_s, inv_deg)
            - _collision_dot(x_s, y_t, inv_deg)
            - _collision_dot(x_t, y_s, inv_deg)
            + _collision_dot(x_t, y_t, inv_deg)
        )
    return run.finish(
        value,
        {"horizon": horizon, "walk_schedule": tuple(schedule), "betas": tuple(betas[:horizon])},
        walks=total_walks,
        notes=tuple(notes),
    )


def _support_inverse_degrees(g, batches) -> dict[int, float]:
    support = sorted(set().union(*(b.endpoint_counts for b in batches)))
    degs = g.degree(np.asarray(support, dtype=np.int64))
    return {v: 1.0 / float(d) for v, d in zip(support, degs)}


def _collision_dot(
    a: walker.WalkBatchResult, b: walker.WalkBatchResult, inv_deg: dict[int, float]
) -> float:
    # endpoint vectors are (count / walks) / sqrt(deg); the dot product
    # therefore accumulates count_a * count_b / deg over the common support
    small, big = a.endpoint_counts, b.endpoint_counts
    if len(small) > len(big):
        small, big = big, small
    total = 0.0
    for v, ca in small.items():
        cb = big.get(v)
        if cb:
            total += ca * cb * inv_deg[v]
    return total / (a.walks * b.walks)


# ----------------------------------------------------------------------
# stopped-walk estimators
# ----------------------------------------------------------------------


def est_mc(
    g, s: int, t: int, params: EstimatorParams, rng: np.random.Generator | None = None
) -> Estimate:
    """Round-trip estimate: 1 / (deg(s) * P[visit t before returning to s]).

    A (1+epsilon)-approximation with probability 2/3 when the true
    resistance is at most the threshold.  Walks start from the
    lower-degree endpoint.
    """
    rng = _resolve_rng(params, rng)
    _require_pair(g, s, t)
    if params.resistance_threshold <= 0.0:
        raise ValueError("resistance_threshold must be positive")
    if params.epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    run = _Run(g, params)

    if g.degree(s) > g.degree(t):
        s, t = t, s
    deg_s = g.degree(s)
    trips = params.overrides.trip_walks
    if trips is None:
        trips = round_trip_count(params.epsilon, params.resistance_threshold, deg_s)
    cap = params.step_cap
    if cap is None:
        cap = default_step_cap(g.m, params.resistance_threshold)

    summary = walker.round_trip_walks(g, s, t, trips, cap, rng)
    resolved = {"trip_walks": trips, "step_cap": cap, "start": s}
    notes: list[str] = []
    if summary.capped > 0.01 * trips:
        notes.append(f"{summary.capped}/{trips} walks hit the step cap")
    if summary.hits == 0:
        return run.finish(
            math.inf,
            resolved,
            success=False,
            walks=trips,
            successes=0,
            capped_walks=summary.capped,
            notes=tuple(
                notes
                + [
                    "no s->t->s round trip observed; "
                    "resistance likely exceeds the threshold"
                ]
            ),
        )
    return run.finish(
        trips / (deg_s * summary.hits),
        resolved,
        walks=trips,
        successes=summary.hits,
        capped_walks=summary.capped,
        notes=tuple(notes),
    )


def est_mc2(
    g, s: int, t: int, params: EstimatorParams, rng: np.random.Generator | None = None
) -> Estimate:
    """Edge-crossing estimate for adjacent pairs.

    The resistance of an edge equals the probability that a walk from s
    first arrives at t by stepping across an (s, t) edge.  Applies only
    when (s, t) is an edge (verified by scanning the shorter neighbor
    list); the guarantee assumes the resistance exceeds the threshold.
    """
    rng = _resolve_rng(params, rng)
    _require_pair(g, s, t)
    if params.resistance_threshold <= 0.0:
        raise ValueError("resistance_threshold must be positive")
    if not 0.0 < params.failure_prob < 1.0:
        raise ValueError("failure_prob must be in (0, 1)")
    if params.epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    run = _Run(g, params)

    if g.degree(s) > g.degree(t):
        s, t = t, s
    deg_s = g.degree(s)
    if not any(g.neighbor(s, i) == t for i in range(deg_s)):
        raise ValueError(f"vertices {s} and {t} are not adjacent")

    crossings = params.overrides.crossing_walks
    if crossings is None:
        crossings = first_visit_count(
            params.epsilon, params.resistance_threshold, params.failure_prob
        )
    cap = params.step_cap
    if cap is None:
        cap = default_step_cap(g.m, params.resistance_threshold)

    summary = walker.first_visit_walks(g, s, t, crossings, cap, rng)
    notes: list[str] = []
    if summary.capped > 0.01 * crossings:
        notes.append(f"{summary.capped}/{crossings} walks hit the step cap")
    return run.finish(
        summary.hits / crossings,
        {"crossing_walks": crossings, "step_cap": cap, "start": s},
        walks=crossings,
        successes=summary.hits,
        capped_walks=summary.capped,
        notes=tuple(notes),
    )


# ----------------------------------------------------------------------
# spanning-tree route
# ----------------------------------------------------------------------


def app_num_st(
    g,
    eps: float,
    delta: float,
    params: EstimatorParams,
    rng: np.random.Generator | None = None,
) -> float:
    """Estimate log(#spanning trees) / n from lazy-walk return rates.

    Averages return indicators of lazy walks whose lengths are drawn
    proportionally to 1/length from [1, 2*rounds), combines them with the
    mean log of twice the degree over sampled vertices, and corrects with
    the closed-form terms.  Additive error eps with probability 1-delta
    at the default sample counts.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    rng = _resolve_rng(params, rng)
    ov = params.overrides
    rounds, weight_norm, iterations, degree_samples = tree_estimator_schedule(
        eps, delta, g.n, rounds=ov.tree_rounds, iterations=ov.tree_iterations
    )

    starts = g.sample_vertex(rng, size=iterations)
    lengths = _sample_lengths(rng, rounds, weight_norm, iterations)
    hits = walker.lazy_return_walks(g, starts, lengths, rng)

    sampled = g.sample_vertex(rng, size=degree_samples)
    degs = g.degree(np.asarray(sampled, dtype=np.int64))
    mean_log_twice_degree = float(np.mean(np.log(2.0 * np.asarray(degs, dtype=np.float64))))

    return (
        -math.log(4.0 * g.m) / g.n
        + mean_log_twice_degree
        - weight_norm * float(np.sum(hits)) / iterations
        + weight_norm / g.n
    )


def _sample_lengths(
    rng: np.random.Generator, rounds: int, weight_norm: float, count: int
) -> np.ndarray:
    """Draw walk lengths from P[t] = 1/(weight_norm * t), 1 <= t < 2*rounds."""
    top = 2 * rounds - 1
    u = rng.random(count) * weight_norm
    if top <= _EXACT_HARMONIC_LIMIT:
        cum = np.cumsum(1.0 / np.arange(1, top + 1))
        return np.searchsorted(cum, u, side="right").astype(np.int64) + 1
    # analytic inverse of the harmonic cdf; exact enough that a boundary
    # misassignment needs |H_t - u| ~ 1e-12
    t = np.floor(np.exp(u - _EULER_GAMMA)).astype(np.int64)
    np.clip(t, 1, top, out=t)
    for _ in range(4):
        h_t = _harmonic_vec(t)
        t[h_t <= u] += 1
        h_prev = _harmonic_vec(t - 1)
        t[h_prev > u] -= 1
        np.clip(t, 1, top, out=t)
    return t


def _harmonic_vec(k: np.ndarray) -> np.ndarray:
    k = np.maximum(k, 1).astype(np.float64)
    return np.log(k) + _EULER_GAMMA + 1.0 / (2.0 * k) - 1.0 / (12.0 * k * k)


def est_spantree(
    g,
    s: int,
    t: int,
    eps: float,
    delta: float,
    params: EstimatorParams,
    rng: np.random.Generator | None = None,
    estimate_log_trees: Callable[..., float] = app_num_st,
) -> Estimate:
    """Resistance as the spanning-tree ratio of contracted to original graph.

    Runs the spanning-tree count estimator on the contraction of (s, t)
    and on the graph itself (half the error and failure budget each) and
    exponentiates the difference.  The output lands within a factor
    e^(eps*n) of the truth with probability 1-delta.
    """
    rng = _resolve_rng(params, rng)
    _require_pair(g, s, t)
    run = _Run(g, params)

    contracted = g.contract_pair(s, t)
    a = estimate_log_trees(contracted, eps / 2.0, delta / 2.0, params, rng)
    b = estimate_log_trees(g, eps / 2.0, delta / 2.0, params, rng)
    value = math.exp(a * (g.n - 1) - b * g.n)

    est = run.finish(value, {"log_trees_contracted": a, "log_trees": b})
    # walks on the contracted copy land on its own counters; fold them in
    if isinstance(contracted, Graph):
        est.access += contracted.stats
    return est


# ----------------------------------------------------------------------
# boosting
# ----------------------------------------------------------------------


def median_boost(
    run_one: Callable[[np.random.Generator], Estimate],
    repeats: int,
    rng: np.random.Generator,
) -> Estimate:
    """Median of independent repeats of an estimator.

    Runs ``run_one`` on independent substreams and returns the median of
    the successful values; failed runs are excluded (and flagged when
    they exceed half the repeats).  Access counts and walks accumulate.
    """
    if repeats < 1 or repeats % 2 == 0:
        raise ValueError("repeats must be odd and >= 1")
    t0 = time.perf_counter()
    estimates = [
        run_one(np.random.default_rng(int(rng.integers(0, 2**63))))
        for _ in range(repeats)
    ]
    access = AccessStats()
    walks = 0
    capped = 0
    for e in estimates:
        access += e.access
        walks += e.walks
        capped += e.capped_walks
    good = [e for e in estimates if e.success]
    notes: list[str] = []
    if len(good) < len(estimates):
        notes.append(f"excluded {len(estimates) - len(good)} failed runs")
    if not good:
        return Estimate(
            value=math.nan,
            success=False,
            access=access,
            elapsed_s=time.perf_counter() - t0,
            params=estimates[0].params,
            resolved={"repeats": repeats, "used": 0},
            walks=walks,
            capped_walks=capped,
            notes=tuple(notes + ["all repeats failed"]),
        )
    if len(good) <= repeats // 2:
        notes.append("more than half of the repeats failed")
    values = sorted(e.value for e in good)
    mid = len(values) // 2
    median = values[mid] if len(values) % 2 == 1 else 0.5 * (values[mid - 1] + values[mid])
    return Estimate(
        value=median,
        success=True,
        access=access,
        elapsed_s=time.perf_counter() - t0,
        params=good[0].params,
        resolved={"repeats": repeats, "used": len(good)},
        walks=walks,
        successes=sum(e.successes for e in good),
        capped_walks=capped,
        notes=tuple(notes),
    )
