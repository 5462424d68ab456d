"""Local estimators for s-t effective resistance on undirected graphs.

Query-model graph storage (:mod:`effres.graph`), random-walk engines
(:mod:`effres.walker`), a dense exact oracle (:mod:`effres.exact`), the
local estimators themselves (:mod:`effres.estimators`), and a benchmark
CLI (:mod:`effres.bench`).
"""

from .graph import AccessStats, Graph, GraphParseError, load_edge_list, read_cache, write_cache
from .walker import WalkBatchResult, batch_endpoints, lazy_walk, simple_walk, walk_until
from .exact import (
    DenseSpectrum,
    GraphTooLargeError,
    SpanningTreeCount,
    commute_time_sim,
    count_spanning_trees,
    effective_resistance_exact,
    spectral_lambda,
    spectrum,
)
from .estimators import (
    Estimate,
    EstimatorParams,
    Overrides,
    app_num_st,
    default_beta_schedule,
    est_mc,
    est_mc2,
    est_spantree,
    est_tranprob,
    est_tranprob_collision,
    median_boost,
)
from .bench import BenchConfig, QueryRecord, emit_csv, run_bench, sample_edge_queries

__version__ = "0.1.0"

__all__ = [
    "AccessStats",
    "Graph",
    "GraphParseError",
    "GraphTooLargeError",
    "load_edge_list",
    "read_cache",
    "write_cache",
    "WalkBatchResult",
    "batch_endpoints",
    "simple_walk",
    "lazy_walk",
    "walk_until",
    "DenseSpectrum",
    "SpanningTreeCount",
    "spectrum",
    "effective_resistance_exact",
    "spectral_lambda",
    "count_spanning_trees",
    "commute_time_sim",
    "Estimate",
    "EstimatorParams",
    "Overrides",
    "est_tranprob",
    "est_tranprob_collision",
    "est_mc",
    "est_mc2",
    "app_num_st",
    "est_spantree",
    "median_boost",
    "default_beta_schedule",
    "BenchConfig",
    "QueryRecord",
    "run_bench",
    "emit_csv",
    "sample_edge_queries",
]
