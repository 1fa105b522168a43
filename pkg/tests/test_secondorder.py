from __future__ import annotations

import dataclasses

import numpy as np
import pytest

import oracles
from walktimes import (
    SizeCapError,
    build_pullback,
    downweighted_edge_chain,
    equilibrium_pullback,
    hitting_matrix,
    is_bistochastic,
    nonbacktracking_edge_chain,
    so_hitting_matrix,
    so_hitting_probabilities,
    so_hitting_via_linegraph,
    so_mean_hitting_times,
    so_node_hitting,
    so_random_target,
    so_return_times,
    uniform_edge_chain,
    uniform_node_chain,
)
from walktimes import secondorder
from walktimes.config import TOL


def pullback_of(chain):
    return equilibrium_pullback(chain, allow_uniform_fallback=is_bistochastic(chain))


def edge_masks(g, k):
    leaving = np.array([i == k for i, _ in g.edges])
    entering = np.array([j == k for _, j in g.edges])
    return leaving, entering


class TestSecondOrderHittingProbabilities:
    def test_nb_k4_all_ones(self, k4):
        for k in range(4):
            phi = so_hitting_probabilities(nonbacktracking_edge_chain(k4), k)
            assert np.allclose(phi, 1.0, atol=1e-12)

    def test_nb_c4_deterministic(self, c4):
        phi = so_hitting_probabilities(nonbacktracking_edge_chain(c4), 2)
        assert phi[c4.edge_id(0, 1)] == 1.0

    def test_boundary_edges_one(self, k33):
        ch = uniform_edge_chain(k33)
        phi = so_hitting_probabilities(ch, 3)
        leaving, entering = edge_masks(k33, 3)
        assert np.all(phi[leaving] == 1.0)
        assert np.all(phi[entering] == 1.0)

    def test_escape_digraph_vs_oracle(self):
        g = oracles.escape_digraph()
        ch = uniform_edge_chain(g)
        k = 1
        leaving, entering = edge_masks(g, k)
        phi = so_hitting_probabilities(ch, k)
        boundary = np.flatnonzero(leaving | entering)
        expect = oracles.reach_fixed_point(ch.matrix.toarray(), boundary)
        expect[np.flatnonzero(leaving | entering)] = 1.0
        assert np.allclose(phi, expect, atol=1e-10)
        # edges inside the second cycle can never reach node 1
        assert phi[g.edge_id(3, 4)] == 0.0


class TestSecondOrderMeanHittingTimes:
    def test_nb_c4_frozen(self, c4):
        ch = nonbacktracking_edge_chain(c4)
        sol = so_mean_hitting_times(ch, 2)
        assert sol.time[c4.edge_id(0, 1)] == pytest.approx(2.0, abs=1e-12)
        assert sol.time[c4.edge_id(0, 3)] == pytest.approx(2.0, abs=1e-12)

    def test_boundary_values(self, k4):
        ch = downweighted_edge_chain(k4, 0.5)
        for k in range(4):
            sol = so_mean_hitting_times(ch, k)
            leaving, entering = edge_masks(k4, k)
            assert np.all(sol.time[leaving] == 0.0)
            assert np.all(sol.time[entering & ~leaving] == 1.0)

    def test_matches_value_iteration(self, k33):
        ch = nonbacktracking_edge_chain(k33)
        for k in (0, 3):
            leaving, entering = edge_masks(k33, k)
            sol = so_mean_hitting_times(ch, k)
            expect = oracles.steps_fixed_point(
                ch.matrix.toarray(),
                np.flatnonzero(leaving),
                np.flatnonzero(entering & ~leaving),
            )
            assert np.allclose(sol.time, expect, atol=1e-8)

    def test_infinite_entries_flagged(self):
        g = oracles.escape_digraph()
        ch = uniform_edge_chain(g)
        sol = so_mean_hitting_times(ch, 1)
        e34 = g.edge_id(3, 4)
        assert not sol.finite[e34]
        assert np.isinf(sol.time[e34])
        # downstream-cycle edges reach node 4 just fine
        sol4 = so_mean_hitting_times(ch, 4)
        assert sol4.finite[e34]


class TestLineGraphRoute:
    def test_nb_c4_frozen(self, c4):
        ch = nonbacktracking_edge_chain(c4)
        tau = so_hitting_via_linegraph(ch, 2)
        assert tau[c4.edge_id(0, 1)] == pytest.approx(2.0, abs=1e-12)
        assert tau[c4.edge_id(2, 1)] == 0.0
        assert tau[c4.edge_id(2, 3)] == 0.0

    def test_agreement_named_graphs(self, c4, k4, k33, petersen):
        graphs = [c4, k4, k33, petersen]
        for g in graphs:
            for make in (uniform_edge_chain,
                         nonbacktracking_edge_chain,
                         lambda gg: downweighted_edge_chain(gg, 0.5)):
                ch = make(g)
                for k in range(g.n):
                    direct = so_mean_hitting_times(ch, k).time
                    via = so_hitting_via_linegraph(ch, k)
                    both = np.isfinite(direct) & np.isfinite(via)
                    assert np.array_equal(np.isfinite(direct), np.isfinite(via))
                    assert np.abs(direct[both] - via[both]).max() <= 1e-10

    def test_agreement_with_infinite_entries(self):
        g = oracles.escape_digraph()
        ch = uniform_edge_chain(g)
        for k in range(6):
            direct = so_mean_hitting_times(ch, k).time
            via = so_hitting_via_linegraph(ch, k)
            assert np.array_equal(np.isfinite(direct), np.isfinite(via))
            both = np.isfinite(direct)
            assert np.abs(direct[both] - via[both]).max() <= 1e-10


class TestNodeHitting:
    def test_nb_c4_frozen(self, c4):
        ch = nonbacktracking_edge_chain(c4)
        pdata = pullback_of(ch)
        assert so_node_hitting(ch, pdata, 2)[0] == pytest.approx(2.0, abs=1e-12)
        # to the neighbor: half the walks go straight (1 step), half the
        # long way round (3 steps)
        assert so_node_hitting(ch, pdata, 1)[0] == pytest.approx(2.0, abs=1e-12)

    def test_target_node_zero(self, k33):
        ch = uniform_edge_chain(k33)
        pdata = pullback_of(ch)
        for k in range(6):
            assert so_node_hitting(ch, pdata, k)[k] == 0.0

    def test_uniform_chain_equals_classical(self, k4):
        ch = uniform_edge_chain(k4)
        pdata = pullback_of(ch)
        classical = hitting_matrix(uniform_node_chain(k4)).matrix
        for k in range(4):
            got = so_node_hitting(ch, pdata, k)
            assert np.abs(got - classical[:, k]).max() <= 1e-8
            assert got[(k + 1) % 4] == pytest.approx(3.0, abs=1e-8)


class TestSecondOrderReturns:
    def test_nb_c4_all_four(self, c4):
        ch = nonbacktracking_edge_chain(c4)
        pdata = pullback_of(ch)
        res = so_return_times(ch, pdata, range(4))
        assert np.allclose(res.per_node, 4.0, atol=1e-12)

    def test_degree_formula_any_alpha(self, petersen):
        total = float(petersen.out_degree.sum())
        for alpha in (0.0, 0.3, 0.7, 1.0):
            ch = downweighted_edge_chain(petersen, alpha)
            pdata = pullback_of(ch)
            res = so_return_times(ch, pdata, range(10))
            expect = total / petersen.out_degree.astype(float)
            assert np.abs(res.per_node - expect).max() <= 1e-10

    def test_kac_identity(self, k33):
        ch = nonbacktracking_edge_chain(k33)
        pdata = pullback_of(ch)
        res = so_return_times(ch, pdata, range(6))
        assert np.abs(res.per_node * pdata.node_density - 1.0).max() <= 1e-10

    def test_set_return_reciprocal_mass(self, k4):
        ch = nonbacktracking_edge_chain(k4)
        pdata = pullback_of(ch)
        res = so_return_times(ch, pdata, [0, 2])
        mass = pdata.node_density[[0, 2]].sum()
        assert res.set_mean == pytest.approx(1.0 / mass, rel=1e-12)

    def test_whole_space_one(self, k4):
        ch = downweighted_edge_chain(k4, 0.4)
        pdata = pullback_of(ch)
        res = so_return_times(ch, pdata, range(4))
        assert res.set_mean == pytest.approx(1.0, abs=1e-12)


class TestSecondOrderHittingMatrix:
    def test_routes_agree(self, k4, k33, petersen):
        for g in (k4, k33, petersen):
            ch = nonbacktracking_edge_chain(g)
            pdata = pullback_of(ch)
            res = so_hitting_matrix(ch, pdata, route="both")
            assert res.max_route_difference <= 1e-8
            assert np.abs(res.matrix - res.lifted).max() <= 1e-8

    def test_zero_diagonal_exact(self, petersen):
        ch = downweighted_edge_chain(petersen, 0.2)
        pdata = pullback_of(ch)
        res = so_hitting_matrix(ch, pdata, route="aggregated")
        assert np.array_equal(np.diag(res.matrix), np.zeros(10))

    def test_uniform_equals_classical_matrix(self, k4):
        ch = uniform_edge_chain(k4)
        pdata = pullback_of(ch)
        res = so_hitting_matrix(ch, pdata, route="both")
        classical = hitting_matrix(uniform_node_chain(k4)).matrix
        assert np.abs(res.matrix - classical).max() <= 1e-8
        off = res.matrix[~np.eye(4, dtype=bool)]
        assert np.allclose(off, 3.0, atol=1e-8)

    def test_nb_vs_classical_c4(self, c4):
        ch = nonbacktracking_edge_chain(c4)
        pdata = pullback_of(ch)
        walk = so_hitting_matrix(ch, pdata, route="aggregated").matrix
        classical = hitting_matrix(uniform_node_chain(c4)).matrix
        assert walk[0, 2] == pytest.approx(2.0, abs=1e-10)
        assert classical[0, 2] == pytest.approx(4.0, abs=1e-10)

    def test_random_graph_routes(self):
        g = oracles.random_undirected(12, 10, 33)
        ch = downweighted_edge_chain(g, 0.35)
        pdata = pullback_of(ch)
        res = so_hitting_matrix(ch, pdata, route="both")
        assert res.max_route_difference <= 1e-8

    def test_size_cap_on_lifted_route(self, petersen, monkeypatch):
        small = dataclasses.replace(TOL, dense_edge_cap=10)
        ch = nonbacktracking_edge_chain(petersen)
        pdata = pullback_of(ch)
        with pytest.raises(SizeCapError):
            so_hitting_matrix(ch, pdata, route="lifted", tol=small)
        # aggregated route ignores the cap on edges
        res = so_hitting_matrix(ch, pdata, route="aggregated", tol=small)
        assert res.matrix.shape == (10, 10)


class TestRandomTarget:
    def test_k33_uniform_condition_holds(self, k33):
        ch = uniform_edge_chain(k33)
        pdata = pullback_of(ch)
        kappa, spread, ok = so_random_target(ch, pdata)
        assert ok
        assert spread <= 1e-9

    def test_k4_uniform_condition_holds(self, k4):
        ch = uniform_edge_chain(k4)
        pdata = pullback_of(ch)
        rt = so_random_target(ch, pdata)
        assert rt.condition_holds
        assert rt.spread <= 1e-9
        # uniform edge chain behaves classically: kappa = (3/4) * 3
        assert rt.kappa == pytest.approx(2.25, abs=1e-10)

    def test_access_vector_matches_matrix(self, petersen):
        ch = nonbacktracking_edge_chain(petersen)
        pdata = pullback_of(ch)
        res = so_hitting_matrix(ch, pdata, route="aggregated")
        rt = so_random_target(ch, pdata, matrix=res)
        expect = res.matrix @ pdata.node_density
        assert np.allclose(rt.access, expect, atol=1e-12)

    def test_vertex_transitive_nb(self, petersen):
        ch = nonbacktracking_edge_chain(petersen)
        pdata = pullback_of(ch)
        rt = so_random_target(ch, pdata)
        assert rt.condition_holds
        assert rt.spread <= 1e-9
