import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from congest_mwc.graphs import (
    Graph,
    gen_planted_cycle,
    gen_random,
    load_graph,
    make_graph,
    reverse_graph,
    save_graph,
    scale_graph,
    scale_level_count,
    stretch_graph,
    undirected_diameter,
)


def test_make_graph_normalizes_undirected():
    g = make_graph(4, [(2, 1), (3, 0, 5)], directed=False)
    assert g.edges == ((1, 2, 1), (0, 3, 5))
    assert g.m == 2
    assert g.max_weight == 5
    assert g.weighted


def test_make_graph_rejects_bad_edges():
    with pytest.raises(ValueError, match="out of range"):
        make_graph(3, [(0, 3)], directed=True)
    with pytest.raises(ValueError, match="self-loop"):
        make_graph(3, [(1, 1)], directed=True)
    with pytest.raises(ValueError, match="weight"):
        make_graph(3, [(0, 1, 0)], directed=True)
    with pytest.raises(ValueError, match="duplicate"):
        make_graph(3, [(0, 1), (1, 0)], directed=False)
    # anti-parallel is legal when directed
    g = make_graph(3, [(0, 1), (1, 0)], directed=True)
    assert g.m == 2


def test_adjacency_views():
    g = make_graph(4, [(0, 1, 2), (1, 2, 3), (3, 1, 4)], directed=True)
    assert g.csr[0, 1] == 2
    assert g.csr[1, 0] == 0
    assert list(g.out_neighbors[1]) == [2]
    assert list(g.link_neighbors[1]) == [0, 2, 3]
    u = make_graph(3, [(0, 1), (1, 2)], directed=False)
    assert list(u.out_neighbors[1]) == [0, 2]


def test_edge_list_round_trip(tmp_path):
    g = gen_random(30, 4.0, directed=True, W=9, seed=3)
    p = tmp_path / "g.txt"
    save_graph(g, str(p))
    h = load_graph(str(p))
    assert h == g


def test_load_graph_reports_line_numbers(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("3 directed\n0 1\nnope\n")
    with pytest.raises(ValueError, match=r"bad\.txt:3"):
        load_graph(str(p))
    p.write_text("3 sideways\n")
    with pytest.raises(ValueError, match="header"):
        load_graph(str(p))
    p.write_text("3 directed\n0 0 1\n")
    with pytest.raises(ValueError, match="self-loop"):
        load_graph(str(p))
    with pytest.raises(ValueError, match="unknown format"):
        load_graph(str(p), format="parquet")


def test_load_graph_directed_triangle(tmp_path):
    p = tmp_path / "tri.txt"
    p.write_text("3 directed\n0 1 1\n1 2 1\n2 0 1\n")
    g = load_graph(str(p))
    assert g.n == 3 and g.directed and g.max_weight == 1
    assert g.edges == ((0, 1, 1), (1, 2, 1), (2, 0, 1))


def test_gen_random_zero_degree_isolated():
    g = gen_random(4, 0.0, directed=False, W=1, seed=7)
    assert g.n == 4 and g.m == 0


def test_gen_random_determinism_and_connectivity():
    a = gen_random(60, 3.0, directed=True, W=5, seed=11)
    b = gen_random(60, 3.0, directed=True, W=5, seed=11)
    assert a == b
    c = gen_random(60, 1.0, directed=False, seed=4, connected=True)
    assert undirected_diameter(c) >= 1


def test_gen_random_edge_counts_near_expectation():
    # ~600 expected edges either way; 3 sigma is about 73
    for directed in (False, True):
        g = gen_random(200, 6.0, directed=directed, seed=1)
        assert abs(g.m - 600) <= 73


def test_gen_planted_cycle_unweighted():
    g, cyc = gen_planted_cycle(40, 5, 5, directed=True, seed=1)
    assert cyc == (0, 1, 2, 3, 4)
    assert g.m == 40
    assert g.max_weight == 1
    assert undirected_diameter(g) >= 1
    # the only directed cycle is the planted one
    d = shortest_path(g.csr, method="D", directed=True)
    best = min(
        d[v, u] + w for u, v, w in g.edges if np.isfinite(d[v, u])
    )
    assert best == 5


def test_gen_planted_cycle_weighted():
    g, cyc = gen_planted_cycle(40, 4, 9, directed=False, seed=2, extra_avg_deg=1.5)
    cyc_edges = {(min(a, b), max(a, b)) for a, b in zip(cyc, cyc[1:] + cyc[:1])}
    total = 0
    for u, v, w in g.edges:
        if (u, v) in cyc_edges:
            total += w
        else:
            assert w >= 9
    assert total == 9
    assert g.m > 40 - 1 + 4  # extra edges present


def test_gen_planted_cycle_validation():
    with pytest.raises(ValueError, match="cycle_len"):
        gen_planted_cycle(10, 2, 2, directed=True)
    with pytest.raises(ValueError, match="split"):
        gen_planted_cycle(50, 7, 5)
    with pytest.raises(ValueError, match="unit-weight"):
        gen_planted_cycle(20, 3, 3, extra_avg_deg=2.0)


def test_reverse_graph():
    g = make_graph(3, [(0, 1, 2), (1, 2, 3)], directed=True)
    r = reverse_graph(g)
    assert r.edges == ((1, 0, 2), (2, 1, 3))
    u = make_graph(3, [(0, 1)], directed=False)
    assert reverse_graph(u) is u


def test_stretch_structure():
    g = make_graph(3, [(0, 1, 3), (1, 2, 1)], directed=True)
    s = stretch_graph(g)
    assert s.graph.n == 5
    assert s.graph.m == 4
    assert list(s.edge_of) == [-1, -1, -1, 0, 0]
    assert list(s.offset_of) == [0, 0, 0, 1, 2]
    assert list(s.owner) == [0, 1, 2, 0, 0]
    assert not s.graph.weighted


def test_stretch_preserves_distances():
    g = gen_random(25, 3.0, directed=True, W=6, seed=9, connected=True)
    s = stretch_graph(g)
    dg = shortest_path(g.csr, method="D", directed=True)
    ds = shortest_path(s.graph.csr, method="D", directed=True)
    assert np.array_equal(dg, ds[: g.n, : g.n])


def test_scale_graph_formula():
    g = make_graph(2, [(0, 1, 5)], directed=False)
    assert scale_level_count(4, 5) == 5
    assert scale_graph(g, 3, 4, 0.5).edges[0][2] == 10
    assert scale_graph(g, 2, 4, 0.5).edges[0][2] == 20
    # weight hitting eps*2^i/(2h) exactly scales to 1
    e = make_graph(3, [(0, 1, 4), (1, 2, 16)], directed=False)
    assert scale_graph(e, 4, 2, 1.0).edges[0][2] == 1


def test_scale_graph_monotone_and_bounds():
    g = make_graph(3, [(0, 1, 2), (1, 2, 7)], directed=True)
    s = scale_graph(g, 2, 3, 0.25)
    assert s.edges[0][2] <= s.edges[1][2]
    with pytest.raises(ValueError, match="level"):
        scale_graph(g, 0, 3, 0.25)
    with pytest.raises(ValueError, match="level"):
        scale_graph(g, 99, 3, 0.25)
    with pytest.raises(ValueError, match="eps"):
        scale_graph(g, 1, 3, 0.0)


def test_undirected_diameter():
    path = make_graph(5, [(i, i + 1) for i in range(4)], directed=False)
    assert undirected_diameter(path) == 4
    tri = make_graph(3, [(0, 1), (1, 2), (2, 0)], directed=True)
    assert undirected_diameter(tri) == 1
    disc = make_graph(4, [(0, 1)], directed=False)
    with pytest.raises(ValueError, match="disconnected"):
        undirected_diameter(disc)


def test_graph_equality_is_structural():
    a = make_graph(3, [(0, 1), (1, 2)], directed=False)
    b = make_graph(3, [(1, 0), (2, 1)], directed=False)
    assert a == b
    assert isinstance(a, Graph)
