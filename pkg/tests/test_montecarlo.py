from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from walktimes import (
    build_pullback,
    downweighted_edge_chain,
    equilibrium_pullback,
    hitting_matrix,
    mean_hitting_times,
    nonbacktracking_edge_chain,
    simulate_fo_hitting,
    simulate_so_hitting,
    simulate_so_return,
    simulate_so_sweep,
    so_node_hitting,
    so_return_times,
    uniform_edge_chain,
    uniform_node_chain,
)


def within(stats, expect, sigmas=3.0):
    slack = sigmas * max(stats.stderr, 1e-12)
    return abs(stats.mean - expect) <= slack


class TestDeterminism:
    def test_same_seed_same_stats(self, k4):
        ch = nonbacktracking_edge_chain(k4)
        pdata = build_pullback(ch)
        a = simulate_so_hitting(ch, pdata, 0, 2, trials=20_000, seed=7)
        b = simulate_so_hitting(ch, pdata, 0, 2, trials=20_000, seed=7)
        assert a == b

    def test_different_seed_differs(self, k4):
        ch = nonbacktracking_edge_chain(k4)
        pdata = build_pullback(ch)
        a = simulate_so_hitting(ch, pdata, 0, 2, trials=20_000, seed=7)
        b = simulate_so_hitting(ch, pdata, 0, 2, trials=20_000, seed=8)
        assert a.mean != b.mean

    def test_block_split_invariance(self, k4):
        # totals that do and do not divide the block size must agree on
        # the overlapping substreams; spot-check determinism across sizes
        ch = uniform_edge_chain(k4)
        pdata = build_pullback(ch)
        a = simulate_so_return(ch, pdata, 1, trials=8192 + 100, seed=3)
        b = simulate_so_return(ch, pdata, 1, trials=8192 + 100, seed=3)
        assert a == b

    def test_sweep_deterministic(self, k33):
        ch = uniform_edge_chain(k33)
        pdata = build_pullback(ch)
        per_a, ret_a = simulate_so_sweep(ch, pdata, 0, trials=10_000, seed=5)
        per_b, ret_b = simulate_so_sweep(ch, pdata, 0, trials=10_000, seed=5)
        assert ret_a == ret_b
        assert all(x == y for x, y in zip(per_a, per_b))


class TestDeterministicWalks:
    def test_nb_c4_hitting_exact(self, c4):
        ch = nonbacktracking_edge_chain(c4)
        pdata = equilibrium_pullback(ch, allow_uniform_fallback=True)
        stats = simulate_so_hitting(ch, pdata, 0, 2, trials=5000, seed=1)
        assert stats.mean == 2.0 and stats.stderr == 0.0
        assert stats.censored == 0

    def test_nb_c4_return_exact(self, c4):
        ch = nonbacktracking_edge_chain(c4)
        pdata = equilibrium_pullback(ch, allow_uniform_fallback=True)
        stats = simulate_so_return(ch, pdata, 3, trials=5000, seed=1)
        assert stats.mean == 4.0 and stats.stderr == 0.0

    def test_source_equals_target(self, k4):
        ch = uniform_edge_chain(k4)
        pdata = build_pullback(ch)
        stats = simulate_so_hitting(ch, pdata, 2, 2, trials=100, seed=0)
        assert stats.mean == 0.0 and stats.trials == 100

    def test_fo_source_in_target_set(self, k4):
        stats = simulate_fo_hitting(uniform_node_chain(k4), 1, {1, 2}, 100, seed=0)
        assert stats.mean == 0.0


class TestAgreementWithAnalytic:
    TRIALS = 40_000

    def test_fo_k4(self, k4):
        ch = uniform_node_chain(k4)
        stats = simulate_fo_hitting(ch, 0, {1}, self.TRIALS, seed=11)
        assert within(stats, 3.0)

    def test_fo_c4(self, c4):
        ch = uniform_node_chain(c4)
        stats = simulate_fo_hitting(ch, 0, {2}, self.TRIALS, seed=12)
        assert within(stats, 4.0)

    def test_fo_set_target(self, petersen):
        ch = uniform_node_chain(petersen)
        S = {3, 7}
        expect = mean_hitting_times(ch, S).time[0]
        stats = simulate_fo_hitting(ch, 0, S, self.TRIALS, seed=13)
        assert within(stats, expect)

    def test_so_nb_c4_neighbor(self, c4):
        ch = nonbacktracking_edge_chain(c4)
        pdata = equilibrium_pullback(ch, allow_uniform_fallback=True)
        stats = simulate_so_hitting(ch, pdata, 0, 1, self.TRIALS, seed=14)
        assert within(stats, 2.0)
        assert stats.stderr > 0

    def test_so_downweighted_c4_return(self, c4):
        ch = downweighted_edge_chain(c4, 0.5)
        pdata = build_pullback(ch)
        stats = simulate_so_return(ch, pdata, 0, self.TRIALS, seed=15)
        assert within(stats, 4.0)

    def test_so_k33_hitting(self, k33):
        ch = nonbacktracking_edge_chain(k33)
        pdata = build_pullback(ch)
        expect = so_node_hitting(ch, pdata, 4)[0]
        stats = simulate_so_hitting(ch, pdata, 0, 4, self.TRIALS, seed=16)
        assert within(stats, expect)

    def test_sweep_matches_analytic(self, k33):
        ch = downweighted_edge_chain(k33, 0.3)
        pdata = build_pullback(ch)
        per, ret = simulate_so_sweep(ch, pdata, 1, self.TRIALS, seed=17)
        returns = so_return_times(ch, pdata, range(6))
        assert within(ret, returns.per_node[1])
        for k in range(6):
            expect = so_node_hitting(ch, pdata, k)[1]
            assert within(per[k], expect)
        assert per[1].mean == 0.0  # the source itself

    def test_directed_fo(self):
        g = oracles.random_digraph(8, 10, 21)
        ch = uniform_node_chain(g)
        expect = mean_hitting_times(ch, [5]).time[0]
        stats = simulate_fo_hitting(ch, 0, {5}, self.TRIALS, seed=18)
        assert within(stats, expect)


class TestCensoring:
    def test_cap_censors_and_flags(self, c4):
        ch = uniform_node_chain(c4)
        stats = simulate_fo_hitting(ch, 0, {2}, trials=2000, seed=9, cap=2)
        assert stats.censored > 0
        assert stats.warning
        assert stats.trials + stats.censored == 2000
        # surviving walks all hit at exactly the shortest path length
        assert stats.mean == 2.0

    def test_all_censored_gives_nan(self, c4):
        ch = uniform_node_chain(c4)
        stats = simulate_fo_hitting(ch, 0, {2}, trials=500, seed=9, cap=1)
        assert stats.censored == 500 and stats.trials == 0
        assert math.isnan(stats.mean)

    def test_zero_censored_on_easy_chain(self, k4):
        ch = uniform_edge_chain(k4)
        pdata = build_pullback(ch)
        stats = simulate_so_hitting(ch, pdata, 0, 3, trials=20_000, seed=4)
        assert stats.censored == 0


class TestValidation:
    def test_positive_trials_required(self, k4):
        ch = uniform_node_chain(k4)
        with pytest.raises(ValueError, match="positive"):
            simulate_fo_hitting(ch, 0, {1}, trials=0, seed=0)

    def test_stderr_scale(self, c4):
        # NB walk from 0 to 1 takes 1 or 3 steps with equal chance, so
        # the population variance is exactly 1 and the standard error
        # at n trials is close to 1/sqrt(n)
        ch = nonbacktracking_edge_chain(c4)
        pdata = equilibrium_pullback(ch, allow_uniform_fallback=True)
        n = 4096
        stats = simulate_so_hitting(ch, pdata, 0, 1, trials=n, seed=2)
        assert stats.stderr == pytest.approx(1 / math.sqrt(n), rel=0.1)
