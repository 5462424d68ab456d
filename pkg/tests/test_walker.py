"""Walk engines: endpoint distributions, determinism, query accounting."""

import numpy as np
import pytest

from effres import exact, walker
from effres.graph import Graph

from helpers import (
    QueryOnlyGraph,
    c5_with_chord,
    complete_graph,
    cycle_graph,
    path_graph,
    star_graph,
)


def tv_distance(counts: dict, walks: int, row: np.ndarray) -> float:
    emp = np.zeros(row.shape[0])
    for v, c in counts.items():
        emp[v] = c / walks
    return 0.5 * float(np.abs(emp - row).sum())


def small_graphs():
    return [
        complete_graph(2),
        complete_graph(3),
        path_graph(4),
        cycle_graph(4),
        star_graph(5),
        c5_with_chord(),
        complete_graph(3).contract_pair(0, 1),  # multigraph
    ]


class TestSingleWalks:
    def test_length_zero_returns_start(self):
        g = complete_graph(3)
        rng = np.random.default_rng(0)
        assert walker.simple_walk(g, 1, 0, rng) == 1
        assert walker.lazy_walk(g, 2, 0, rng) == 2

    def test_k3_one_step_is_uniform_over_neighbors(self):
        g = complete_graph(3)
        rng = np.random.default_rng(1)
        ends = [walker.simple_walk(g, 0, 1, rng) for _ in range(20_000)]
        frac1 = ends.count(1) / 20_000
        assert ends.count(0) == 0
        assert abs(frac1 - 0.5) <= 0.02

    def test_path_two_steps_splits_evenly(self):
        # dense-oracle check: row 0 of P^2 puts mass 1/2 on each endpoint
        g = path_graph(3)
        p2 = np.linalg.matrix_power(exact.transition_matrix(g), 2)
        assert np.allclose(p2[0], [0.5, 0.0, 0.5])
        rng = np.random.default_rng(2)
        ends = [walker.simple_walk(g, 0, 2, rng) for _ in range(20_000)]
        assert abs(ends.count(0) / 20_000 - 0.5) <= 0.02

    def test_lazy_k2_stays_half_the_time(self):
        g = complete_graph(2)
        rng = np.random.default_rng(3)
        ends = [walker.lazy_walk(g, 0, 1, rng) for _ in range(20_000)]
        assert abs(ends.count(0) / 20_000 - 0.5) <= 0.02

    def test_lazy_k3_two_steps_return_prob(self):
        # ((I+P)/2)^2 gives return probability 3/8 on the triangle
        g = complete_graph(3)
        l2 = np.linalg.matrix_power(exact.lazy_transition_matrix(g), 2)
        assert abs(l2[0, 0] - 3 / 8) < 1e-12
        b = walker.batch_endpoints(g, 0, 2, 50_000, np.random.default_rng(4), lazy=True)
        assert abs(b.count(0) / 50_000 - 3 / 8) <= 0.015

    def test_isolated_vertex_rejected(self):
        g = Graph.from_edges(3, [(0, 1)])  # vertex 2 isolated
        with pytest.raises(ValueError, match="isolated"):
            walker.simple_walk(g, 2, 1, np.random.default_rng(0))


class TestBatchEndpoints:
    def test_length_zero_all_at_start(self):
        g = complete_graph(3)
        b = walker.batch_endpoints(g, 1, 0, 10, np.random.default_rng(0))
        assert b.endpoint_counts == {1: 10}
        assert b.total_steps == 0

    def test_counts_sum_to_walks(self):
        g = c5_with_chord()
        b = walker.batch_endpoints(g, 0, 4, 5_000, np.random.default_rng(1))
        assert sum(b.endpoint_counts.values()) == 5_000

    def test_k3_one_step_fraction(self):
        g = complete_graph(3)
        b = walker.batch_endpoints(g, 0, 1, 40_000, np.random.default_rng(2))
        assert 0.48 <= b.count(1) / 40_000 <= 0.52

    def test_step_accounting_exact(self):
        g = complete_graph(3)
        g.stats.reset()
        b = walker.batch_endpoints(g, 0, 3, 1_000, np.random.default_rng(3))
        assert b.total_steps == 3_000
        assert g.stats.neighbor_queries == 3_000
        assert g.stats.degree_queries == 3_000

    def test_endpoint_distribution_all_graphs_and_lengths(self):
        # empirical endpoint law vs dense matrix powers, both walk kinds
        for g in small_graphs():
            p = exact.transition_matrix(g)
            lazy = exact.lazy_transition_matrix(g)
            for length in range(7):
                rng = np.random.default_rng(100 + length)
                b = walker.batch_endpoints(g, 0, length, 100_000, rng)
                row = np.linalg.matrix_power(p, length)[0]
                assert tv_distance(b.endpoint_counts, b.walks, row) <= 0.02
                bl = walker.batch_endpoints(g, 0, length, 100_000, rng, lazy=True)
                lazy_row = np.linalg.matrix_power(lazy, length)[0]
                assert tv_distance(bl.endpoint_counts, bl.walks, lazy_row) <= 0.02

    def test_same_seed_same_tallies(self):
        g = c5_with_chord()
        a = walker.batch_endpoints(g, 0, 5, 20_000, np.random.default_rng(9))
        b = walker.batch_endpoints(g, 0, 5, 20_000, np.random.default_rng(9))
        assert a.endpoint_counts == b.endpoint_counts

    def test_native_and_facade_paths_identical(self):
        for lazy in (False, True):
            for g in (complete_graph(4), c5_with_chord()):
                facade = QueryOnlyGraph(g)
                a = walker.batch_endpoints(
                    g, 0, 4, 3_000, np.random.default_rng(5), lazy=lazy
                )
                b = walker.batch_endpoints(
                    facade, 0, 4, 3_000, np.random.default_rng(5), lazy=lazy
                )
                assert a.endpoint_counts == b.endpoint_counts

    def test_big_graph_path_matches_small_path(self):
        # same streams regardless of the kernel layout chosen by size
        from helpers import sparse_random_lcc

        g = sparse_random_lcc(6_000, 6.0, 4)  # above the walk-major cutoff
        facade = QueryOnlyGraph(g)
        a = walker.batch_endpoints(g, 0, 3, 500, np.random.default_rng(6))
        b = walker.batch_endpoints(facade, 0, 3, 500, np.random.default_rng(6))
        assert a.endpoint_counts == b.endpoint_counts


class TestWalkUntil:
    def test_k2_return_takes_two_steps(self):
        g = complete_graph(2)
        out = walker.walk_until(
            g, 0, lambda prev, cur, step: cur == 0, 100, np.random.default_rng(0)
        )
        assert out.stopped and out.steps == 2

    def test_never_true_predicate_caps(self):
        g = complete_graph(3)
        out = walker.walk_until(
            g, 0, lambda prev, cur, step: False, 100, np.random.default_rng(1)
        )
        assert not out.stopped and out.steps == 100

    def test_cap_must_be_positive(self):
        g = complete_graph(3)
        with pytest.raises(ValueError, match="cap"):
            walker.walk_until(g, 0, lambda p, c, s: True, 0, np.random.default_rng(0))

    def test_hit_info_carries_payload(self):
        g = path_graph(3)
        out = walker.walk_until(
            g,
            0,
            lambda prev, cur, step: (prev, cur) if cur == 2 else None,
            10_000,
            np.random.default_rng(2),
        )
        assert out.stopped and out.hit_info == (1, 2)

    def test_k3_mean_hitting_time_matches_absorbing_chain(self):
        # independent oracle: fundamental matrix of the chain absorbed at t
        g = complete_graph(3)
        p = exact.transition_matrix(g)
        t = 1
        keep = [0, 2]
        q = p[np.ix_(keep, keep)]
        expected = np.linalg.solve(np.eye(2) - q, np.ones(2))[0]
        assert abs(expected - 2.0) < 1e-12
        rng = np.random.default_rng(3)
        steps = [
            walker.walk_until(g, 0, lambda pv, c, s: c == t, 10_000, rng).steps
            for _ in range(20_000)
        ]
        mean = np.mean(steps)
        assert abs(mean - expected) <= 3 * np.std(steps) / np.sqrt(len(steps))


class TestStoppedBatches:
    def test_round_trip_success_probability_k3(self):
        # P[visit t before returning to s] = 1/(R deg(s)) = 3/4 on the triangle
        g = complete_graph(3)
        out = walker.round_trip_walks(g, 0, 1, 20_000, 10_000, np.random.default_rng(0))
        assert out.capped == 0
        assert abs(out.hits / out.walks - 0.75) <= 0.01

    def test_first_visit_crossing_probability_k2(self):
        g = complete_graph(2)
        out = walker.first_visit_walks(g, 0, 1, 500, 100, np.random.default_rng(1))
        assert out.hits == 500 and out.misses == 0

    def test_first_visit_crossing_probability_k3(self):
        # crossing probability equals the edge resistance 2/3
        g = complete_graph(3)
        out = walker.first_visit_walks(
            g, 0, 1, 50_000, 10_000, np.random.default_rng(2)
        )
        assert abs(out.hits / out.walks - 2 / 3) <= 0.01

    def test_cap_counts_as_capped(self):
        g = cycle_graph(6)
        out = walker.round_trip_walks(g, 0, 3, 200, 1, np.random.default_rng(3))
        assert out.capped == 200

    def test_native_and_facade_paths_identical(self):
        g = c5_with_chord()
        facade = QueryOnlyGraph(g)
        a = walker.round_trip_walks(g, 0, 2, 400, 5_000, np.random.default_rng(4))
        b = walker.round_trip_walks(facade, 0, 2, 400, 5_000, np.random.default_rng(4))
        assert (a.hits, a.misses, a.capped, a.total_steps) == (
            b.hits,
            b.misses,
            b.capped,
            b.total_steps,
        )
        c = walker.first_visit_walks(g, 0, 2, 400, 5_000, np.random.default_rng(5))
        d = walker.first_visit_walks(
            facade, 0, 2, 400, 5_000, np.random.default_rng(5)
        )
        assert (c.hits, c.misses, c.capped, c.total_steps) == (
            d.hits,
            d.misses,
            d.capped,
            d.total_steps,
        )

    def test_step_accounting(self):
        g = complete_graph(4)
        g.stats.reset()
        out = walker.round_trip_walks(g, 0, 1, 300, 10_000, np.random.default_rng(6))
        assert g.stats.neighbor_queries == out.total_steps
        assert g.stats.degree_queries == out.total_steps


class TestLazyReturnWalks:
    def test_zero_length_always_returns(self):
        g = complete_graph(3)
        hits = walker.lazy_return_walks(
            g, np.array([0, 1, 2]), np.array([0, 0, 0]), np.random.default_rng(0)
        )
        assert hits.tolist() == [1, 1, 1]

    def test_return_rate_matches_dense_lazy_power(self):
        g = complete_graph(3)
        l4 = np.linalg.matrix_power(exact.lazy_transition_matrix(g), 4)
        n_trials = 40_000
        hits = walker.lazy_return_walks(
            g,
            np.zeros(n_trials, np.int64),
            np.full(n_trials, 4, np.int64),
            np.random.default_rng(1),
        )
        assert abs(hits.mean() - l4[0, 0]) <= 0.01

    def test_native_and_facade_paths_identical(self):
        g = c5_with_chord()
        facade = QueryOnlyGraph(g)
        starts = np.array([0, 1, 2, 3, 4] * 40, np.int64)
        lengths = np.arange(200, dtype=np.int64) % 9
        a = walker.lazy_return_walks(g, starts, lengths, np.random.default_rng(2))
        b = walker.lazy_return_walks(facade, starts, lengths, np.random.default_rng(2))
        assert np.array_equal(a, b)
