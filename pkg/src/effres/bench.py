"""Benchmark harness and CLI.

Reproduces the experimental protocol around the estimators: load a SNAP
edge list, draw edge queries uniformly with replacement (or read an
explicit pair list), run the chosen estimator per query with per-query
seeds and isolated access counters, and emit a per-query CSV plus a
sorted-quantile summary.  Wall time is measured around the estimator
call only; ground truth (when the graph fits the dense oracle) is
computed outside the timed section.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import estimators, exact
from .estimators import Estimate, EstimatorParams, Overrides
from .graph import Graph, load_edge_list

__all__ = [
    "ALGORITHMS",
    "BenchConfig",
    "QueryRecord",
    "BenchSummary",
    "sample_edge_queries",
    "run_bench",
    "emit_csv",
    "main",
]

ALGORITHMS = ("tp", "tpc", "mc", "mc2", "st", "exact")

_QUANTILES = tuple(range(0, 101, 5))

CSV_HEADER = (
    "dataset,algo,s,t,estimate,exact,rel_error,deg_q,nbr_q,samp_q,wall_ns,success"
)


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark run: dataset, algorithm, query workload, knobs."""

    dataset: str | Path | None
    algo: str
    out: str | Path
    queries: int = 1000
    pairs_file: str | Path | None = None
    params: EstimatorParams = field(default_factory=EstimatorParams)
    ground_truth: str = "auto"  # auto | oracle | none
    exact_cap: int = exact.DEFAULT_DENSE_CAP
    seed: int = 0
    parallel: int = 1
    keep_multi: bool = False
    largest_component: bool = True
    dataset_name: str | None = None


@dataclass
class QueryRecord:
    """One row of the per-query CSV (s and t are original dataset ids)."""

    dataset: str
    algo: str
    s: int
    t: int
    estimate: float | None
    exact: float | None
    rel_error: float | None
    deg_q: int
    nbr_q: int
    samp_q: int
    wall_ns: int
    success: bool
    note: str = ""


@dataclass
class BenchSummary:
    queries: int
    successes: int
    with_exact: int
    frac_rel_error_le_01: float | None
    wall_ns_quantiles: tuple[int, ...]
    rel_error_quantiles: tuple[float, ...]
    timing_mode: str


def sample_edge_queries(
    g: Graph, count: int, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """``count`` edges drawn uniformly with replacement, in stored order."""
    if g.m < 1:
        raise ValueError("graph has no edges to sample")
    if count < 1:
        raise ValueError("count must be >= 1")
    edges = g._edge_array()
    picks = rng.integers(0, g.m, size=count)
    return [(int(u), int(v)) for u, v in edges[picks]]


def _load_pairs(path: str | Path, g: Graph) -> list[tuple[int, int]]:
    """Explicit query pairs, given as original dataset ids."""
    raw_sorted = np.sort(g.original_ids)
    order = np.argsort(g.original_ids)
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise ValueError(f"pairs file line {lineno}: expected two ids")
            out = []
            for tok in parts:
                raw = int(tok)
                idx = np.searchsorted(raw_sorted, raw)
                if idx >= raw_sorted.shape[0] or raw_sorted[idx] != raw:
                    raise ValueError(
                        f"pairs file line {lineno}: vertex {raw} not in graph"
                    )
                out.append(int(order[idx]))
            pairs.append((out[0], out[1]))
    if not pairs:
        raise ValueError("pairs file contained no queries")
    return pairs


def _resolve_truth(config: BenchConfig, g: Graph) -> bool:
    if config.ground_truth == "oracle":
        return True
    if config.ground_truth == "none":
        return False
    if config.ground_truth == "auto":
        return g.n <= config.exact_cap and g.connected_flag
    raise ValueError(f"unknown ground-truth mode {config.ground_truth!r}")


def _run_algo(
    algo: str,
    g: Graph,
    s: int,
    t: int,
    params: EstimatorParams,
    rng: np.random.Generator,
    exact_cap: int,
) -> Estimate:
    if algo == "tp":
        return estimators.est_tranprob(g, s, t, params, rng)
    if algo == "tpc":
        return estimators.est_tranprob_collision(g, s, t, params, rng)
    if algo == "mc":
        return estimators.est_mc(g, s, t, params, rng)
    if algo == "mc2":
        return estimators.est_mc2(g, s, t, params, rng)
    if algo == "st":
        return estimators.est_spantree(
            g, s, t, params.epsilon, params.failure_prob, params, rng
        )
    if algo == "exact":
        t0 = time.perf_counter()
        value = exact.effective_resistance_exact(g, s, t, cap=exact_cap)
        return Estimate(
            value=value,
            success=True,
            access=g.stats.snapshot(),
            elapsed_s=time.perf_counter() - t0,
            params=params,
            resolved={},
        )
    raise ValueError(f"unknown algorithm {algo!r}")


def run_bench(
    config: BenchConfig, graph: Graph | None = None
) -> tuple[list[QueryRecord], BenchSummary]:
    """Execute the configured benchmark; see the module docstring."""
    if config.algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {config.algo!r}")
    if graph is not None:
        g = graph
    elif config.dataset is not None:
        g = load_edge_list(
            config.dataset,
            largest_component=config.largest_component,
            keep_multi=config.keep_multi,
        )
    else:
        raise ValueError("either a dataset path or a graph is required")
    name = config.dataset_name or (
        Path(config.dataset).name if config.dataset else "graph"
    )

    rng = np.random.default_rng(config.seed)
    if config.pairs_file is not None:
        queries = _load_pairs(config.pairs_file, g)
    else:
        queries = sample_edge_queries(g, config.queries, rng)

    use_oracle = _resolve_truth(config, g)
    params = config.params
    if (
        config.algo in ("tp", "tpc")
        and params.spectral_bound is None
    ):
        if not use_oracle:
            raise ValueError(
                "the transition-probability estimators need a spectral bound: "
                "pass --lambda or enable the exact oracle"
            )
        params = replace(params, spectral_bound=exact.spectral_lambda(g, cap=config.exact_cap))
    if use_oracle:
        exact.spectrum(g, cap=config.exact_cap).factor  # warm outside timing

    def one_query(index: int) -> QueryRecord:
        s, t = queries[index]
        qg = g.fork_stats()
        qrng = np.random.default_rng([config.seed, index])
        note = ""
        est: Estimate | None = None
        t0 = time.perf_counter_ns()
        try:
            est = _run_algo(config.algo, qg, s, t, params, qrng, config.exact_cap)
        except (ValueError, IndexError, exact.GraphTooLargeError) as err:
            note = str(err)
        wall_ns = time.perf_counter_ns() - t0

        truth: float | None = None
        rel: float | None = None
        if use_oracle:
            truth = exact.effective_resistance_exact(g, s, t, cap=config.exact_cap)
            if est is not None and est.success and truth > 0:
                rel = abs(truth - est.value) / truth
        stats = (est.access if est is not None else qg.stats.snapshot())
        return QueryRecord(
            dataset=name,
            algo=config.algo,
            s=int(g.original_ids[s]),
            t=int(g.original_ids[t]),
            estimate=(est.value if est is not None else None),
            exact=truth,
            rel_error=rel,
            deg_q=stats.degree_queries,
            nbr_q=stats.neighbor_queries,
            samp_q=stats.vertex_samples,
            wall_ns=wall_ns,
            success=(est is not None and est.success),
            note=note or (", ".join(est.notes) if est is not None else ""),
        )

    if config.parallel > 1:
        with ThreadPoolExecutor(max_workers=config.parallel) as pool:
            records = list(pool.map(one_query, range(len(queries))))
        timing_mode = "concurrent"
    else:
        records = [one_query(i) for i in range(len(queries))]
        timing_mode = "sequential"

    return records, summarize(records, timing_mode)


def _quantiles(values: Sequence[float]) -> tuple:
    if not values:
        return tuple()
    ordered = sorted(values)
    top = len(ordered) - 1
    return tuple(ordered[round(q / 100 * top)] for q in _QUANTILES)


def summarize(records: list[QueryRecord], timing_mode: str) -> BenchSummary:
    rels = [r.rel_error for r in records if r.rel_error is not None]
    frac = None
    if rels:
        frac = sum(1 for x in rels if x <= 0.1) / len(rels)
    return BenchSummary(
        queries=len(records),
        successes=sum(1 for r in records if r.success),
        with_exact=sum(1 for r in records if r.exact is not None),
        frac_rel_error_le_01=frac,
        wall_ns_quantiles=_quantiles([r.wall_ns for r in records]),
        rel_error_quantiles=_quantiles(rels),
        timing_mode=timing_mode,
    )


# ----------------------------------------------------------------------
# CSV output
# ----------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def summary_path(out: str | Path) -> Path:
    out = Path(out)
    stem = out.name[: -len(out.suffix)] if out.suffix else out.name
    return out.with_name(stem + ".summary.csv")


def emit_csv(
    records: list[QueryRecord], summary: BenchSummary, path: str | Path
) -> None:
    """Write the per-query CSV and its sibling ``.summary.csv``."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER.split(","))
        for r in records:
            w.writerow(
                [
                    r.dataset,
                    r.algo,
                    r.s,
                    r.t,
                    _fmt(r.estimate),
                    _fmt(r.exact),
                    _fmt(r.rel_error),
                    r.deg_q,
                    r.nbr_q,
                    r.samp_q,
                    r.wall_ns,
                    _fmt(r.success),
                ]
            )
    with open(summary_path(path), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stat", "value"])
        w.writerow(["queries", summary.queries])
        w.writerow(["successes", summary.successes])
        w.writerow(["with_exact", summary.with_exact])
        w.writerow(["frac_rel_error_le_0.1", _fmt(summary.frac_rel_error_le_01)])
        w.writerow(["timing_mode", summary.timing_mode])
        for q, v in zip(_QUANTILES, summary.wall_ns_quantiles):
            w.writerow([f"wall_ns_q{q:03d}", v])
        for q, v in zip(_QUANTILES, summary.rel_error_quantiles):
            w.writerow([f"rel_error_q{q:03d}", _fmt(v)])


def parse_records(path: str | Path) -> list[QueryRecord]:
    """Read back a per-query CSV written by :func:`emit_csv`."""
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER.split(","):
            raise ValueError("unexpected CSV header")
        for row in reader:
            records.append(
                QueryRecord(
                    dataset=row[0],
                    algo=row[1],
                    s=int(row[2]),
                    t=int(row[3]),
                    estimate=float(row[4]) if row[4] else None,
                    exact=float(row[5]) if row[5] else None,
                    rel_error=float(row[6]) if row[6] else None,
                    deg_q=int(row[7]),
                    nbr_q=int(row[8]),
                    samp_q=int(row[9]),
                    wall_ns=int(row[10]),
                    success=row[11] == "true",
                )
            )
    return records


# ----------------------------------------------------------------------
# CLI
# ----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="effres-bench",
        description="Per-query effective-resistance benchmark over a SNAP edge list.",
    )
    p.add_argument("dataset", help="path to a SNAP-style edge list")
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--out", required=True, help="per-query CSV output path")
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--pairs-file", default=None, help="explicit query pairs (raw ids)")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument(
        "--lambda",
        dest="spectral_bound",
        type=float,
        default=None,
        help="walk spectral parameter for tp/tpc (exact oracle fills it in when omitted)",
    )
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=1.0 / 3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", choices=("auto", "oracle", "none"), default="auto")
    p.add_argument("--exact-cap", type=int, default=exact.DEFAULT_DENSE_CAP)
    p.add_argument("--step-cap", type=int, default=None)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--keep-multi", action="store_true")
    p.add_argument(
        "--whole-graph",
        action="store_true",
        help="keep the whole graph instead of the largest connected component",
    )
    for name in (
        "horizon",
        "walks",
        "trip-walks",
        "crossing-walks",
        "tree-rounds",
        "tree-iterations",
    ):
        p.add_argument(f"--override-{name}", type=int, default=None)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = Overrides(
        horizon=args.override_horizon,
        walks=args.override_walks,
        trip_walks=args.override_trip_walks,
        crossing_walks=args.override_crossing_walks,
        tree_rounds=args.override_tree_rounds,
        tree_iterations=args.override_tree_iterations,
    )
    params = EstimatorParams(
        epsilon=args.eps,
        spectral_bound=args.spectral_bound,
        resistance_threshold=args.gamma,
        failure_prob=args.delta,
        step_cap=args.step_cap,
        seed=args.seed,
        overrides=overrides,
    )
    config = BenchConfig(
        dataset=args.dataset,
        algo=args.algo,
        out=args.out,
        queries=args.queries,
        pairs_file=args.pairs_file,
        params=params,
        ground_truth=args.exact,
        exact_cap=args.exact_cap,
        seed=args.seed,
        parallel=args.parallel,
        keep_multi=args.keep_multi,
        largest_component=not args.whole_graph,
    )

    # fail on an unwritable output path before any estimation work
    for target in (Path(config.out), summary_path(config.out)):
        with open(target, "w", encoding="utf-8"):
            pass

    records, summary = run_bench(config)
    emit_csv(records, summary, config.out)

    print(f"dataset: {records[0].dataset if records else config.dataset}")
    print(f"algo: {config.algo}  queries: {summary.queries}  successes: {summary.successes}")
    if summary.frac_rel_error_le_01 is not None:
        print(f"fraction with relative error <= 0.1: {summary.frac_rel_error_le_01:.3f}")
    if summary.wall_ns_quantiles:
        med = summary.wall_ns_quantiles[len(summary.wall_ns_quantiles) // 2]
        print(f"median per-query wall time: {med / 1e6:.3f} ms")
    print(f"wrote {config.out} and {summary_path(config.out)}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
