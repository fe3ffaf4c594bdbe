import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfrb import FeatureModel, Graph, ParseError, edge_prob, parse_edge_list, validate_feature_model
from mfrb.graph import random_graph


def test_two_edge_path():
    g = parse_edge_list(b"0 1\n1 2\n")
    assert (g.n, g.m) == (3, 2)
    assert g.out_adj(0) == [(1, 0)]


def test_empty_stream():
    g = parse_edge_list(b"")
    assert (g.n, g.m) == (0, 0)


def test_duplicate_dropped_reverse_kept(caplog):
    g = parse_edge_list(b"# c\n0 1\n0 1\n1 0\n")
    assert (g.n, g.m) == (2, 2)
    assert g.dropped_duplicates == 1
    assert "duplicate" in caplog.text


def test_self_loop_dropped():
    g = parse_edge_list("% header\n\n3 3\n3 4\n")
    assert g.m == 1 and g.dropped_self_loops == 1


def test_sparse_ids_are_remapped():
    g = parse_edge_list(b"10 500\n500 7\n")
    assert g.n == 3
    assert g.labels.tolist() == [7, 10, 500]
    assert g.node_of(500) == 2
    assert g.to_edge_list() == "10 500\n500 7\n"


def test_no_remap_uses_max_id():
    g = parse_edge_list(b"0 5\n", remap=False)
    assert g.n == 6


@pytest.mark.parametrize("text, lineno", [(b"0 1\nx 2\n", 2), (b"0\n", 1), (b"0 1\n1 -2\n", 2)])
def test_malformed_lines_report_line_number(text, lineno):
    with pytest.raises(ParseError) as err:
        parse_edge_list(text)
    assert err.value.lineno == lineno


def test_extra_columns_ignored():
    g = parse_edge_list(b"0 1 0.5 1234\n")
    assert g.m == 1


edge_lists = st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), max_size=40)


@given(edge_lists)
@settings(max_examples=150)
def test_adjacency_invariants(pairs):
    text = "".join(f"{u} {v}\n" for u, v in pairs)
    g = parse_edge_list(text)
    assert g.out_degree().sum() == g.in_degree().sum() == g.m
    assert (g.src < g.n).all() and (g.dst < g.n).all()
    seen_out = sorted(e for u in range(g.n) for _, e in g.out_adj(u))
    seen_in = sorted(e for v in range(g.n) for _, e in g.in_adj(v))
    assert seen_out == seen_in == list(range(g.m))
    for v in range(g.n):
        assert sorted(s for s, _ in g.in_adj(v)) == sorted(t for t in range(g.n) for w, _ in g.out_adj(t) if w == v)
        for s, e in g.in_adj(v):
            assert (g.src[e], g.dst[e]) == (s, v)
    # canonical serialization round-trips the labelled edge set
    text = g.to_edge_list()
    assert parse_edge_list(text).to_edge_list() == text
    assert text == "".join(f"{u} {v}\n" for u, v in sorted({p for p in pairs if p[0] != p[1]}))


def test_adjacency_sorted_by_neighbour():
    g = parse_edge_list(b"0 3\n0 1\n2 1\n0 2\n")
    assert [t for t, _ in g.out_adj(0)] == [1, 2, 3]
    assert [s for s, _ in g.in_adj(1)] == [0, 2]


def test_symmetrize():
    g = parse_edge_list(b"0 1\n1 2\n2 1\n").symmetrized()
    assert g.m == 4


def test_cp_probability():
    g = parse_edge_list(b"0 1\n1 2\n")
    fm = FeatureModel.cp([0.4, 0.5], [0.3, 0.7])
    assert edge_prob(g, fm, 0, 1) == 0.5
    assert edge_prob(g, fm, 1, 0) == 0.4


def test_wc_probability():
    g = Graph.from_edges(5, [(0, 4), (1, 4), (2, 4), (3, 4), (4, 0)])
    fm = FeatureModel.wc([0.5, 0.5])
    assert edge_prob(g, fm, 0, 0) == 0.25
    assert edge_prob(g, fm, 4, 1) == 1.0
    assert np.allclose(fm.edge_probs(g), [[0.25] * 4 + [1.0]] * 2)


def test_edge_prob_is_pure_and_checks_range():
    g = parse_edge_list(b"0 1\n")
    fm = FeatureModel.cp([0.3], [1.0])
    assert edge_prob(g, fm, 0, 0) == edge_prob(g, fm, 0, 0) == 0.3
    with pytest.raises(IndexError):
        edge_prob(g, fm, 1, 0)
    with pytest.raises(IndexError):
        edge_prob(g, fm, 0, 1)


def test_validate_feature_model():
    assert validate_feature_model(FeatureModel.cp([0.4, 0.5], [0.3, 0.7])) == []
    assert validate_feature_model(FeatureModel.cp([0.4], [1.0])) == []
    assert validate_feature_model(FeatureModel.cp([0.4, 0.5], [0.5, 0.6])) == ["weights sum to 1.1"]
    problems = validate_feature_model(FeatureModel.cp([1.2, 0.5], [-0.5, 1.5]))
    assert any("positive" in p for p in problems) and any("[0, 1]" in p for p in problems)
    assert FeatureModel.wc([0.2, 0.8]).w_bar == 0.8


def test_random_graph_is_reproducible():
    a, b = random_graph(50, 120, seed=4), random_graph(50, 120, seed=4)
    assert a == b and a.m == 120
    assert (a.src != a.dst).all()
