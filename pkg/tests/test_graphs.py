import json
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from gbsiso.families import complete_graph, cycle_graph, empty_graph, path_graph, rook_graph, shrikhande_graph
from gbsiso.graphs import (
    Graph,
    GraphFormatError,
    apply_permutation,
    brute_force_isomorphic,
    characteristic_polynomial,
    emit_graph6,
    enumerate_cospectral_pairs,
    graph_from_json,
    graph_to_json,
    is_connected,
    is_cospectral,
    nonisomorphic_graphs,
    parse_graph6,
    read_graph_file,
    spectrum,
    srg_eigenvalues,
    validate_srg,
)


@st.composite
def graphs(draw, max_order=9):
    n = draw(st.integers(1, max_order))
    bits = draw(st.lists(st.booleans(), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    edges = [e for e, b in zip(((i, j) for i in range(n) for j in range(i + 1, n)), bits) if b]
    return Graph.from_edges(n, edges)


@st.composite
def graph_and_perm(draw, max_order=9):
    g = draw(graphs(max_order))
    perm = draw(st.permutations(list(range(g.order))))
    return g, perm


# --- Graph type --------------------------------------------------------------


def test_graph_validation():
    with pytest.raises(GraphFormatError, match="symmetric"):
        Graph(np.array([[0, 1], [0, 0]]))
    with pytest.raises(GraphFormatError, match="diagonal"):
        Graph(np.array([[1, 0], [0, 0]]))
    with pytest.raises(GraphFormatError, match="0 or 1"):
        Graph(np.array([[0, 2], [2, 0]]))
    with pytest.raises(GraphFormatError, match="self-loop"):
        Graph.from_edges(3, [(1, 1)])
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(ValueError):
        g.adjacency[0, 2] = 1


# --- graph6 ------------------------------------------------------------------


def test_graph6_against_networkx():
    rnd = random.Random(1)
    for n in (0, 1, 2, 5, 6, 10, 62, 63, 70):
        g = nx.gnp_random_graph(n, 0.4, seed=rnd.randrange(1000))
        ref = nx.to_graph6_bytes(g, header=False).decode().strip()
        ours = Graph(nx.to_numpy_array(g, dtype=np.int64).reshape(n, n))
        assert emit_graph6(ours) == ref
        assert parse_graph6(ref).same_adjacency(ours)


def test_graph6_six_vertex_example():
    g = nx.Graph()
    g.add_nodes_from(range(6))
    g.add_edges_from([(0, 2), (0, 4), (1, 3), (1, 4), (2, 5), (3, 5)])
    text = nx.to_graph6_bytes(g, header=False).decode().strip()
    parsed = parse_graph6(text)
    assert parsed.order == 6
    assert set(parsed.edges()) == {tuple(sorted(e)) for e in g.edges()}


def test_graph6_trivial_graphs():
    assert not parse_graph6(emit_graph6(empty_graph(3))).adjacency.any()
    k4 = parse_graph6(emit_graph6(complete_graph(4)))
    assert (k4.adjacency == np.ones((4, 4)) - np.eye(4)).all()
    assert parse_graph6(">>graph6<<" + emit_graph6(complete_graph(4))).same_adjacency(k4)


@given(graphs(62))
def test_graph6_round_trip(g):
    assert parse_graph6(emit_graph6(g)).same_adjacency(g)


@pytest.mark.parametrize("text,needle", [
    ("E?~o!", "byte 4"),
    ("E?~", "byte 1"),
    ("E?~oo", "byte 1"),
    ("Bx", "byte 1: non-zero padding"),
    ("~?", "truncated"),
    ("", "empty"),
])
def test_graph6_errors_name_offsets(text, needle):
    with pytest.raises(GraphFormatError, match=needle):
        parse_graph6(text)


def test_json_round_trip(tmp_path):
    g = Graph.from_edges(4, [(0, 1), (2, 3)], label="two edges")
    obj = graph_to_json(g)
    assert obj == {"order": 4, "edges": [[0, 1], [2, 3]], "label": "two edges"}
    assert graph_from_json(obj) == g
    p = tmp_path / "g.json"
    p.write_text(json.dumps([obj, {"order": 2, "edges": [[0, 1]]}]))
    gs = read_graph_file(p)
    assert gs[0] == g and gs[1].label == "g[1]"
    with pytest.raises(GraphFormatError):
        graph_from_json({"edges": []})


def test_read_graph6_file(data_dir):
    gs = read_graph_file(data_dir / "srg16.g6")
    assert [g.label for g in gs] == ["srg16[0]", "srg16[1]"]


# --- spectra -----------------------------------------------------------------


def test_spectrum_examples():
    s = spectrum(Graph.from_edges(2, [(0, 1)]))
    assert np.allclose(s.eigenvalues, (1, -1)) and s.spectral_norm == pytest.approx(1)
    assert spectrum(empty_graph(4)).eigenvalues == (0.0,) * 4
    ev = np.round(spectrum(rook_graph()).eigenvalues, 9)
    vals, counts = np.unique(ev, return_counts=True)
    assert dict(zip(vals.tolist(), counts.tolist())) == {6.0: 1, 2.0: 6, -2.0: 9}
    assert spectrum(rook_graph()).spectral_norm == pytest.approx(6)


def test_srg_eigenvalue_formula_matches_solver():
    for g in (rook_graph(), shrikhande_graph(), cycle_graph(5)):
        p = validate_srg(g)
        expect = sorted((v for v, m in srg_eigenvalues(p) for _ in range(m)), reverse=True)
        assert np.allclose(spectrum(g).eigenvalues, expect)


@given(graphs(9))
def test_spectrum_invariants(g):
    s = spectrum(g)
    assert abs(sum(s.eigenvalues)) < 1e-9
    assert s.spectral_norm == pytest.approx(max(abs(x) for x in s.eigenvalues))
    assert list(s.eigenvalues) == sorted(s.eigenvalues, reverse=True)


def test_is_cospectral_examples():
    r, s = rook_graph(), shrikhande_graph()
    assert is_cospectral(r, r)
    assert is_cospectral(r, s)
    assert not is_cospectral(complete_graph(3), path_graph(3))
    with pytest.raises(ValueError, match="order"):
        is_cospectral(complete_graph(3), complete_graph(4))


def test_characteristic_polynomial():
    assert characteristic_polynomial(path_graph(3)) == (1, 0, -2, 0)
    assert characteristic_polynomial(complete_graph(3)) == (1, 0, -3, -2)


# --- strongly regular graphs --------------------------------------------------


def test_validate_srg_examples():
    assert str(validate_srg(rook_graph())) == "SRG(16,6,2,2)"
    assert str(validate_srg(shrikhande_graph())) == "SRG(16,6,2,2)"
    assert str(validate_srg(cycle_graph(5))) == "SRG(5,2,0,1)"
    assert validate_srg(path_graph(4)) is None
    assert validate_srg(complete_graph(5)) is None
    assert validate_srg(empty_graph(5)) is None


@given(graphs(8))
def test_srg_identity_when_present(g):
    p = validate_srg(g)
    if p is not None:
        assert p.identity_holds()


# --- permutations ------------------------------------------------------------


def test_apply_permutation_examples():
    k2 = Graph.from_edges(2, [(0, 1)])
    assert apply_permutation(k2, [1, 0]).same_adjacency(k2)
    p4 = path_graph(4)
    assert apply_permutation(p4, [0, 1, 2, 3]).same_adjacency(p4)
    with pytest.raises(ValueError, match="degree"):
        apply_permutation(p4, [0, 1, 2])
    with pytest.raises(ValueError):
        apply_permutation(p4, [0, 0, 1, 2])


def test_apply_permutation_is_pt_a_p():
    g = path_graph(5)
    perm = [3, 0, 4, 1, 2]
    P = np.zeros((5, 5), dtype=int)
    for i, v in enumerate(perm):
        P[v, i] = 1
    assert (apply_permutation(g, perm).adjacency == P.T @ g.adjacency @ P).all()


@given(graph_and_perm(9))
def test_permutation_preserves_spectrum_and_degrees(gp):
    g, perm = gp
    h = apply_permutation(g, perm)
    assert sorted(h.degrees()) == sorted(g.degrees())
    assert np.allclose(spectrum(h).eigenvalues, spectrum(g).eigenvalues, atol=1e-9)


@given(graph_and_perm(8))
def test_brute_force_finds_witness(gp):
    g, perm = gp
    h = apply_permutation(g, perm)
    w = brute_force_isomorphic(h, g)
    assert w is not None
    assert apply_permutation(g, w).same_adjacency(h)
    assert is_cospectral(h, g)


def test_brute_force_examples():
    assert brute_force_isomorphic(complete_graph(3), empty_graph(3)) is None
    with pytest.raises(ValueError, match="limit"):
        brute_force_isomorphic(rook_graph(), shrikhande_graph())
    with pytest.raises(ValueError, match="order"):
        brute_force_isomorphic(complete_graph(3), complete_graph(4))


# --- enumeration -------------------------------------------------------------


def test_graph_counts():
    # numbers of graphs up to isomorphism on 1..6 vertices
    assert [len(nonisomorphic_graphs(n)) for n in range(1, 7)] == [1, 2, 4, 11, 34, 156]


def test_enumeration_limit():
    with pytest.raises(ValueError):
        nonisomorphic_graphs(8)


def test_cospectral_pairs_small():
    assert enumerate_cospectral_pairs(3) == []
    assert enumerate_cospectral_pairs(4, connected_only=True) == []
    # the star K_{1,4} and C4 + K1 are the smallest cospectral pair
    pairs5 = enumerate_cospectral_pairs(5)
    assert len(pairs5) == 1
    degs = sorted(sorted(g.degrees()) for g in pairs5[0])
    assert degs == [[0, 2, 2, 2, 2], [1, 1, 1, 1, 4]]


def test_connected_pair_on_six_vertices():
    pairs = enumerate_cospectral_pairs(6, connected_only=True)
    assert len(pairs) == 1
    a, b = pairs[0]
    assert is_connected(a) and is_connected(b)
    assert is_cospectral(a, b)
    assert brute_force_isomorphic(a, b) is None
