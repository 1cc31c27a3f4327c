import math
import pickle

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from habicascade.graph import (EdgeListError, Graph, eigenvector_centrality, generate_ba,
                               generate_er, generate_ws, graph_metrics, load_edge_list,
                               parse_edge_list, path_graph, read_edge_list, star_graph,
                               write_edge_list)
from smallgraphs import nonisomorphic_graphs, triangle


def _to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.node_count))
    h.add_edges_from(map(tuple, g.edges.tolist()))
    return h


def _check_structure(g):
    for u in range(g.node_count):
        nb = g.neighbors(u).tolist()
        assert u not in nb
        assert nb == sorted(set(nb))
        for v in nb:
            assert u in g.neighbors(v)
    assert sorted(g.label_index.values()) == list(range(g.node_count))


def test_load_path():
    g = load_edge_list("a b\nb c")
    assert (g.node_count, g.edge_count) == (3, 2)


def test_load_drops_loops_and_duplicates():
    g, summary = parse_edge_list("a a\na b\na b")
    assert (g.node_count, g.edge_count) == (2, 1)
    assert (summary.self_loops, summary.duplicates) == (1, 1)


def test_load_triangle_symmetric():
    g = load_edge_list("a b\nb c\nc a\n")
    assert g.node_count == 3 and g.edge_count == 3
    assert {g.labels[v] for v in g.neighbors(g.id_of("a"))} == {"b", "c"}
    _check_structure(g)


def test_first_appearance_ids_and_comments():
    g = load_edge_list("# header\n% other\n\nz y\ny x\n")
    assert g.labels == ("z", "y", "x")


def test_malformed_line_reports_line_number():
    with pytest.raises(EdgeListError) as exc:
        load_edge_list("a b\nc\n")
    assert exc.value.lineno == 2
    assert "line 2" in str(exc.value)


def test_empty_input_is_error():
    with pytest.raises(EdgeListError):
        load_edge_list("# nothing\n")


def test_loading_twice_is_identical():
    text = "1 2\n2 3\n3 1\n4 1\n"
    a, b = load_edge_list(text), load_edge_list(text)
    assert a == b
    assert np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)


def test_round_trip(tmp_path):
    g = generate_ba(50, 3, 4)
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    h = read_edge_list(path)
    assert h.edge_count == g.edge_count
    assert {frozenset((h.labels[u], h.labels[v])) for u, v in h.edges} == \
        {frozenset((str(u), str(v))) for u, v in g.edges}


def test_graph_is_immutable_and_picklable():
    g = triangle()
    with pytest.raises(AttributeError):
        g.node_count = 4
    with pytest.raises(ValueError):
        g.indices[0] = 2
    assert pickle.loads(pickle.dumps(g)) == g


def test_ba_small_and_counts():
    g = generate_ba(2, 1, 1)
    assert g.edge_count == 1 and g.node_count == 2
    assert generate_ba(1000, 7, 3).edge_count == 21 + 7 * 993
    with pytest.raises(ValueError):
        generate_ba(2, 2, 1)


def test_ba_heavy_tail():
    hits = 0
    for seed in range(100):
        deg = generate_ba(1000, 7, seed).degrees()
        hits += deg.max() > 5 * deg.mean()
    assert hits >= 95


def test_er_extremes_and_mean():
    assert generate_er(10, 0, 1).edge_count == 0
    assert generate_er(10, 1, 1).edge_count == 45
    with pytest.raises(ValueError):
        generate_er(10, 1.5, 1)
    counts = [generate_er(500, 0.02, s).edge_count for s in range(200)]
    pairs = 500 * 499 // 2
    sigma = math.sqrt(pairs * 0.02 * 0.98)
    # standard error of the mean over 200 graphs, with the 3 sigma bound on individual counts
    assert abs(np.mean(counts) - pairs * 0.02) <= 3 * sigma / math.sqrt(200)
    assert all(abs(c - pairs * 0.02) <= 5 * sigma for c in counts)


def test_ws_lattice_and_rewiring():
    ring = generate_ws(10, 2, 0.0, 1)
    assert ring.edge_count == 10 and set(ring.degrees().tolist()) == {2}
    assert nx.is_isomorphic(_to_nx(ring), nx.cycle_graph(10))
    assert generate_ws(100, 6, 0.1, 5).edge_count == 300
    assert graph_metrics(generate_ws(100, 6, 0.0, 1)).global_clustering == pytest.approx(0.6, abs=1e-12)
    for bad in [(10, 3, 0.1), (10, 10, 0.1)]:
        with pytest.raises(ValueError):
            generate_ws(*bad, 1)


def test_generators_are_deterministic():
    for make in (lambda s: generate_ba(80, 3, s), lambda s: generate_er(80, 0.1, s),
                 lambda s: generate_ws(80, 4, 0.3, s)):
        assert make(11) == make(11)
        assert make(11) != make(12)


@settings(max_examples=1000, deadline=None)
@given(st.sampled_from(["ba", "er", "ws"]), st.integers(3, 40), st.integers(0, 2**31),
       st.floats(0, 1))
def test_generated_graphs_are_simple(model, n, seed, x):
    if model == "ba":
        g = generate_ba(n, 1 + int(x * (n - 2)), seed)
    elif model == "er":
        g = generate_er(n, x, seed)
    else:
        k = 2 * int(x * (n - 1) / 2)
        g = generate_ws(n, k, x, seed)
        assert g.edge_count == n * k // 2
    _check_structure(g)


def test_metrics_small_cases():
    tri = graph_metrics(triangle())
    assert tri.mean_degree == 2.0 and tri.global_clustering == 1.0
    assert graph_metrics(path_graph(3)).global_clustering == 0.0
    star = star_graph(3)
    m = graph_metrics(star)
    assert m.mean_degree == 1.5
    ev = eigenvector_centrality(star)
    assert ev[0] == pytest.approx(1.0)
    assert np.allclose(ev[1:], 1 / math.sqrt(3), atol=1e-8)


def test_trees_have_zero_clustering():
    for g in nonisomorphic_graphs(5):
        if g.edge_count == g.node_count - 1 and nx.is_connected(_to_nx(g)):
            assert graph_metrics(g).global_clustering == 0.0


def test_metrics_agree_with_networkx():
    for g in [generate_ba(300, 4, 2), generate_er(200, 0.05, 3), generate_ws(200, 6, 0.2, 4)]:
        h = _to_nx(g)
        m = graph_metrics(g)
        assert m.global_clustering == pytest.approx(nx.transitivity(h), abs=1e-12)
        assert m.mean_degree == pytest.approx(2 * h.number_of_edges() / h.number_of_nodes())
        if nx.is_connected(h):
            ref = nx.eigenvector_centrality_numpy(h)
            ref = np.array([ref[i] for i in range(g.node_count)])
            ref /= ref.max()
            assert np.allclose(eigenvector_centrality(g), ref, atol=1e-6)


def test_disconnected_graph_metrics_do_not_fail():
    g = Graph(5, [(0, 1), (2, 3), (3, 4)])
    m = graph_metrics(g)
    assert 0 < m.mean_eigenvector_centrality <= 1
