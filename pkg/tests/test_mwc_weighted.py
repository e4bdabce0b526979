import math

import networkx as nx
import numpy as np
import pytest

from congest_mwc.engine import RoundLog
from congest_mwc.graphs import (
    Graph,
    gen_planted_cycle,
    gen_random,
    make_graph,
    scale_graph,
    scale_level_count,
    stretch_graph,
)
from congest_mwc.multisource import approx_hop_sssp
from congest_mwc.mwc_weighted import (
    _scaled_wave_records,
    _scaled_wave_records_directed,
    hop_limited_mwc_directed,
    mwc_directed_weighted,
    mwc_undirected_weighted,
)
from congest_mwc.mwc_directed import mwc_directed_unweighted
from congest_mwc.oracles import exact_mwc, hop_limited_mwc_oracle


def weighted_cycle(weights, directed=False):
    k = len(weights)
    return make_graph(
        k, [(i, (i + 1) % k, weights[i]) for i in range(k)], directed
    )


def weighted_tree(seed=0, n=12, W=9):
    rng = np.random.default_rng(seed)
    edges = [
        (int(rng.integers(0, v)), v, int(rng.integers(1, W + 1)))
        for v in range(1, n)
    ]
    return make_graph(n, edges, False)


def all_cycle_weights(g):
    """Weight and hop length of every simple cycle, by exhaustion."""
    gr = nx.Graph()
    gr.add_nodes_from(range(g.n))
    w = {}
    for u, v, wt in g.edges:
        gr.add_edge(u, v)
        w[frozenset((u, v))] = wt
    out = []
    for cyc in nx.simple_cycles(gr):
        total = sum(
            w[frozenset((cyc[i], cyc[(i + 1) % len(cyc)]))]
            for i in range(len(cyc))
        )
        out.append((total, len(cyc)))
    return out


def band(g, fn, eps, seeds, lo=None):
    gstar = exact_mwc(g).weight
    lo = gstar if lo is None else lo
    for seed in seeds:
        m, _ = fn(g, eps, seed=seed)
        if math.isfinite(gstar):
            assert lo <= m <= (2 + 2 * eps) * gstar + 1e-9, (seed, m, gstar)
        else:
            assert m == math.inf, (seed, m)


class TestClosingRecords:
    def test_unit_triangle_is_exact(self):
        g = weighted_cycle([1, 1, 1])
        for seed in range(6):
            m, _ = mwc_undirected_weighted(g, 0.5, seed=seed)
            assert m == 3

    def test_trees_stay_infinite(self):
        for seed in range(4):
            g = weighted_tree(seed)
            for eps in (0.25, 0.5, 1.0):
                m, _, info = mwc_undirected_weighted(
                    g, eps, seed=seed, details=True
                )
                assert m == math.inf
                assert not np.isfinite(info["closing"]).any()
                assert not np.isfinite(info["scaled"]).any()

    def test_forced_source_closes_the_planted_cycle(self):
        g, cyc = gen_planted_cycle(80, 7, 18, seed=2, extra_avg_deg=1.5)
        for w in cyc[:3]:
            _, _, info = mwc_undirected_weighted(
                g, 0.5, seed=0, sample_override=(w,), details=True
            )
            assert np.nanmin(info["closing"]) <= (1 + 0.5) * 18

    def test_closing_value_certifies_a_cycle(self):
        # distinct first hops force branches that share only the source,
        # so the closing value can never undercut the true minimum
        for seed in range(5):
            g = gen_random(30, 3.0, W=8, seed=seed, connected=True)
            gstar = exact_mwc(g).weight
            _, _, info = mwc_undirected_weighted(
                g, 0.25, seed=seed, details=True
            )
            finite = info["closing"][np.isfinite(info["closing"])]
            if finite.size:
                assert finite.min() >= gstar - 1e-9

    def test_tag_words_double_the_cascade(self):
        g = gen_random(24, 3.0, W=6, seed=1, connected=True)
        log = RoundLog()
        _, _, info = mwc_undirected_weighted(g, 0.5, seed=0, log=log,
                                             details=True)
        _, piece = approx_hop_sssp(
            g, info["sample"].members, info["hop"], 0.25,
            record_tag="first-hop"
        )
        assert log.breakdown["long_sssp"] == piece.rounds
        tb = log.breakdown["tree_build"]
        got = log.trace[tb:tb + piece.rounds]
        assert got == [2 * x for x in piece.trace]
        share = 2 * len(info["sample"].members) * 2 * g.m
        assert log.words >= 2 * piece.words + share


class TestScaledWaves:
    def test_wave_records_match_hop_limited_oracle(self):
        # saturated sampling makes each level reproduce the capped
        # stretched girth of its scaled copy exactly
        cases = [
            (make_graph(5, [(0, 1, 2), (1, 2, 1), (2, 0, 3), (2, 3, 4),
                            (3, 4, 1), (4, 2, 2)], False), 0.5),
            (gen_random(9, 2.5, W=4, seed=7, connected=True), 0.25),
        ]
        for g, eps in cases:
            _, _, info = mwc_undirected_weighted(g, eps, seed=1, details=True)
            h, hstar = info["hop"], info["hstar"]
            for i in range(1, info["levels"] + 1):
                gi = scale_graph(g, i, h, eps / 2)
                want = hop_limited_mwc_oracle(stretch_graph(gi).graph, hstar)
                back = info["per_level"][i - 1]
                if math.isfinite(back):
                    got = back * (2 * h) / (eps / 2 * 2 ** i)
                    assert abs(got - want) < 1e-6, (i, got, want)
                else:
                    assert want == math.inf, (i, want)

    def test_directed_wave_records_match_oracle(self):
        g = make_graph(5, [(0, 1, 2), (1, 2, 1), (2, 0, 3), (2, 3, 4),
                           (3, 4, 1), (4, 2, 2)], True)
        _, _, info = mwc_directed_weighted(g, 0.5, seed=1, details=True)
        h, hstar = info["hop"], info["hstar"]
        for i in range(1, info["levels"] + 1):
            gi = scale_graph(g, i, h, 0.25)
            want = hop_limited_mwc_oracle(stretch_graph(gi).graph, hstar)
            back = info["per_level"][i - 1]
            if math.isfinite(back):
                got = back * (2 * h) / (0.25 * 2 ** i)
                assert abs(got - want) < 1e-6, (i, got, want)
            else:
                assert want == math.inf, (i, want)

    def test_levels_never_undercut_the_answer(self):
        for seed in range(4):
            g = gen_random(24, 3.0, W=8, seed=seed, connected=True)
            gstar = exact_mwc(g).weight
            _, _, info = mwc_undirected_weighted(g, 0.5, seed=seed,
                                                 details=True)
            for lvl in info["per_level"]:
                assert lvl >= gstar - 1e-9 or not math.isfinite(lvl)

    def test_every_short_cycle_is_covered_by_some_level(self):
        # pure arithmetic: each cycle of fewer hops than the bound h has
        # a level whose scaled length fits the cap and scales back to at
        # most (1 + eps) times its weight
        eps, eps_in = 0.5, 0.25
        for seed in range(4):
            g = gen_random(12, 3.0, W=6, seed=seed, connected=True)
            _, _, info = mwc_undirected_weighted(g, eps, seed=0, details=True)
            h, hstar = info["hop"], info["hstar"]
            gr = nx.Graph()
            gr.add_edges_from((u, v) for u, v, _ in g.edges)
            ow = {frozenset((u, v)): w for u, v, w in g.edges}
            cycles = [
                [frozenset((cyc[j], cyc[(j + 1) % len(cyc)]))
                 for j in range(len(cyc))]
                for cyc in nx.simple_cycles(gr)
            ]
            scaled = [
                {frozenset((u, v)): w
                 for u, v, w in scale_graph(g, i, h, eps_in).edges}
                for i in range(1, info["levels"] + 1)
            ]
            for cyc in cycles:
                if len(cyc) >= h:
                    continue
                wc = sum(ow[e] for e in cyc)
                hit = False
                for i, sw in enumerate(scaled, start=1):
                    tot = sum(sw[e] for e in cyc)
                    back = tot * eps_in * 2 ** i / (2 * h)
                    if tot <= hstar and back <= (1 + eps) * wc + 1e-9:
                        hit = True
                        break
                assert hit, (seed, wc, len(cyc))

    def test_weighted_trees_make_no_wave_records(self):
        g = weighted_tree(3, n=10)
        log = RoundLog()
        recs = _scaled_wave_records(g, g, 200, list(range(g.n)), log)
        assert not np.isfinite(recs).any()

    def test_wave_records_on_plain_cycle(self):
        g = weighted_cycle([2, 3, 4, 1])
        log = RoundLog()
        recs = _scaled_wave_records(g, g, 100, list(range(4)), log)
        assert np.nanmin(recs[np.isfinite(recs)]) == 10
        assert log.breakdown["scaled_waves"] > 0
        assert log.breakdown["scaled_share"] == 4

    def test_directed_wave_records_on_plain_cycle(self):
        g = weighted_cycle([2, 3, 4, 1], directed=True)
        log = RoundLog()
        recs = _scaled_wave_records_directed(g, g, 100, list(range(4)), log)
        assert recs[np.isfinite(recs)].min() == 10
        assert "scaled_share" not in log.breakdown

    def test_cap_silences_heavy_cycles(self):
        g = weighted_cycle([5, 5, 5])
        log = RoundLog()
        recs = _scaled_wave_records(g, g, 14, list(range(3)), log)
        assert not np.isfinite(recs).any()
        recs = _scaled_wave_records(g, g, 15, list(range(3)), RoundLog())
        assert recs[np.isfinite(recs)].min() == 15


class TestUndirectedWeighted:
    def test_planted_cycle_band(self):
        g, _ = gen_planted_cycle(150, 8, 20, seed=3, extra_avg_deg=1.5)
        for seed in range(3):
            m, _ = mwc_undirected_weighted(g, 0.25, seed=seed)
            assert 20 <= m <= 50

    def test_sandwich_on_mixed_instances(self):
        instances = [
            gen_random(30, 3.0, W=16, seed=0, connected=True),
            gen_random(40, 2.5, W=64, seed=1, connected=True),
            gen_random(24, 4.0, W=8, seed=2, connected=True),
            gen_planted_cycle(48, 6, 15, seed=4, extra_avg_deg=1.0)[0],
            weighted_cycle([7, 3, 9, 2, 11]),
        ]
        for g in instances:
            for eps in (0.25, 0.5, 1.0):
                band(g, mwc_undirected_weighted, eps, range(3))

    def test_infinite_exactly_on_forests(self):
        for seed in range(3):
            m, _ = mwc_undirected_weighted(weighted_tree(seed), 0.5,
                                           seed=seed)
            assert m == math.inf

    def test_deterministic_per_seed(self):
        g = gen_random(30, 3.0, W=8, seed=9, connected=True)
        runs = []
        for _ in range(3):
            log = RoundLog()
            m, _ = mwc_undirected_weighted(g, 0.5, seed=4, log=log)
            runs.append((m, log.digest()))
        assert len(set(runs)) == 1

    def test_integer_results_come_back_as_ints(self):
        m, _ = mwc_undirected_weighted(weighted_cycle([1, 1, 1]), 0.5)
        assert isinstance(m, int)

    def test_rejects_bad_inputs(self):
        gd = weighted_cycle([1, 1, 1], directed=True)
        with pytest.raises(ValueError, match="undirected"):
            mwc_undirected_weighted(gd, 0.5)
        g = weighted_cycle([1, 1, 1])
        with pytest.raises(ValueError, match="eps must be positive"):
            mwc_undirected_weighted(g, 0.0)
        z = Graph(n=2, directed=False, edges=((0, 1, 0),))
        with pytest.raises(ValueError, match="zero-weight edge"):
            mwc_undirected_weighted(z, 0.5)
        parts = make_graph(4, [(0, 1, 2), (2, 3, 2)], False)
        with pytest.raises(ValueError, match="disconnected"):
            mwc_undirected_weighted(parts, 0.5)

    def test_accounting_is_consistent(self):
        g = gen_random(24, 3.0, W=6, seed=5, connected=True)
        log = RoundLog()
        mwc_undirected_weighted(g, 0.5, seed=1, log=log)
        assert len(log.trace) == log.rounds
        assert sum(log.trace) <= log.words
        for stage in ("tree_build", "long_sssp", "long_share",
                      "scaled_waves", "scaled_share", "min_convergecast"):
            assert stage in log.breakdown, stage


class TestDirectedWeighted:
    def test_weighted_triangle_band(self):
        g = weighted_cycle([2, 3, 4], directed=True)
        for seed in range(5):
            m, _ = mwc_directed_weighted(g, 0.5, seed=seed)
            assert 9 <= m <= 22.5

    def test_acyclic_inputs_give_inf(self):
        dag = make_graph(6, [(0, 1, 2), (0, 2, 5), (1, 3, 1), (2, 3, 4),
                             (3, 4, 6), (3, 5, 2)], True)
        chain = make_graph(4, [(0, 1, 3), (1, 2, 3), (2, 3, 3)], True)
        for g in (dag, chain):
            for seed in range(3):
                m, _, info = mwc_directed_weighted(g, 0.25, seed=seed,
                                                   details=True)
                assert m == math.inf
                assert not np.isfinite(info["closing"]).any()
                assert not np.isfinite(info["scaled"]).any()

    def test_planted_cycle_band(self):
        g, _ = gen_planted_cycle(200, 10, 30, directed=True, seed=5,
                                 extra_avg_deg=1.0)
        for seed in range(3):
            m, _ = mwc_directed_weighted(g, 0.25, seed=seed)
            assert 30 <= m <= 75

    def test_sandwich_on_mixed_instances(self):
        instances = [
            gen_random(30, 3.0, W=16, directed=True, seed=11, connected=True),
            gen_random(40, 3.5, W=8, directed=True, seed=12, connected=True),
            gen_random(24, 5.0, W=64, directed=True, seed=13, connected=True),
            weighted_cycle([5, 1, 8, 2], directed=True),
        ]
        for g in instances:
            for eps in (0.25, 0.5, 1.0):
                band(g, mwc_directed_weighted, eps, range(3))

    def test_deterministic_per_seed(self):
        g = gen_random(30, 3.5, W=8, directed=True, seed=21, connected=True)
        runs = []
        for _ in range(3):
            log = RoundLog()
            m, _ = mwc_directed_weighted(g, 0.5, seed=2, log=log)
            runs.append((m, log.digest()))
        assert len(set(runs)) == 1

    def test_rejects_bad_inputs(self):
        g = weighted_cycle([1, 1, 1])
        with pytest.raises(ValueError, match="directed"):
            mwc_directed_weighted(g, 0.5)
        z = Graph(n=2, directed=True, edges=((0, 1, 0), (1, 0, 1)))
        with pytest.raises(ValueError, match="zero-weight edge"):
            mwc_directed_weighted(z, 0.5)

    def test_no_exchange_stages(self):
        g = weighted_cycle([2, 3, 4], directed=True)
        log = RoundLog()
        mwc_directed_weighted(g, 0.5, seed=0, log=log)
        assert "long_share" not in log.breakdown
        assert "scaled_share" not in log.breakdown
        assert len(log.trace) == log.rounds


class TestHopLimitedDirected:
    def test_unit_triangle_under_tight_cap(self):
        g = weighted_cycle([1, 1, 1], directed=True)
        m, _ = hop_limited_mwc_directed(g, 3, seed=0)
        assert m == 3

    def test_cap_excludes_heavy_cycle(self):
        g = weighted_cycle([3, 3, 3, 3], directed=True)
        m, _ = hop_limited_mwc_directed(g, 10, seed=0)
        assert m == math.inf
        m, _ = hop_limited_mwc_directed(g, 12, seed=0)
        assert m == 12

    def test_cap_keeps_only_the_light_cycle(self):
        e8 = [(i, (i + 1) % 4, 2) for i in range(4)]
        e25 = [(4 + i, 4 + (i + 1) % 5, 5) for i in range(5)]
        g = make_graph(9, e8 + e25 + [(0, 4, 1)], directed=True)
        for seed in range(4):
            m, _ = hop_limited_mwc_directed(g, 10, seed=seed)
            assert 8 <= m <= 16

    def test_wide_cap_matches_unrestricted_run(self):
        g = make_graph(6, [(0, 1, 2), (1, 2, 1), (2, 0, 2), (2, 3, 3),
                           (3, 4, 1), (4, 5, 2), (5, 3, 1)], True)
        st = stretch_graph(g)
        m, _ = hop_limited_mwc_directed(g, st.graph.n, seed=3)
        mu, _ = mwc_directed_unweighted(st.graph, 3)
        assert m == mu

    def test_tree_and_aggregation_run_on_the_host(self):
        # a heavy two-vertex cycle stretches far beyond the host
        # diameter, and the host-priced stages must not notice
        g = make_graph(2, [(0, 1, 40), (1, 0, 40)], True)
        log = RoundLog()
        m, _ = hop_limited_mwc_directed(g, 80, seed=0, log=log)
        assert m == 80
        assert log.breakdown["tree_build"] <= 3
        assert log.breakdown["mu_convergecast"] <= 4

    def test_details_exposes_the_stretched_form(self):
        g = weighted_cycle([2, 2, 2], directed=True)
        m, _, info = hop_limited_mwc_directed(g, 6, seed=0, details=True)
        assert m == 6
        assert info["stretched"].graph.n == 6

    def test_rejects_bad_inputs(self):
        g = weighted_cycle([1, 1, 1])
        with pytest.raises(ValueError, match="directed"):
            hop_limited_mwc_directed(g, 3)
        gd = weighted_cycle([1, 1, 1], directed=True)
        with pytest.raises(ValueError, match="hop bound"):
            hop_limited_mwc_directed(gd, 0)
        z = Graph(n=2, directed=True, edges=((0, 1, 0), (1, 0, 1)))
        with pytest.raises(ValueError, match="zero-weight edge"):
            hop_limited_mwc_directed(z, 5)
