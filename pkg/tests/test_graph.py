import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hopdiff.errors import ParameterError, ParseError, RangeError, ShapeError
from hopdiff.graph import (
    FeatureMatrix,
    Graph,
    LabelVector,
    load_edge_list,
    load_edge_list_remapped,
    load_features,
    load_labels,
    synth_sbm,
    write_edge_list,
)

from conftest import random_graph


def test_load_simple(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("0 1\n0 2\n1 3\n")
    g = load_edge_list(p)
    assert g.num_nodes == 4
    assert g.neighbors(0).tolist() == [1, 2]
    assert g.neighbors(1).tolist() == [0, 3]
    g.check()


def test_load_dedup_and_self_loop(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("0 1\n1 0\n0 0\n")
    with pytest.warns(UserWarning, match="dropped 1 self-loop"):
        g = load_edge_list(p)
    assert g.num_nodes == 2
    assert g.num_edges == 1


def test_comments_and_blank_lines(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("# header\n\n0 1\n  # indented comment\n1 2\n")
    assert load_edge_list(p).num_edges == 2


def test_parse_error_has_line_number(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("0 1\n1 x\n")
    with pytest.raises(ParseError, match=":2:"):
        load_edge_list(p)


def test_range_error_with_num_nodes(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("0 1\n1 5\n")
    with pytest.raises(RangeError):
        load_edge_list(p, num_nodes=3)


def test_explicit_num_nodes_keeps_isolated(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("0 1\n")
    g = load_edge_list(p, num_nodes=5)
    assert g.num_nodes == 5
    assert g.degrees().tolist() == [1, 1, 0, 0, 0]


def test_remap(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("10 30\n30 1000\n")
    g, ids = load_edge_list_remapped(p)
    assert ids.tolist() == [10, 30, 1000]
    assert g.num_nodes == 3
    assert g.neighbors(1).tolist() == [0, 2]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.floats(0.0, 0.5), st.integers(0, 2**32 - 1))
def test_round_trip_and_invariants(tmp_path_factory, n, p, seed):
    g = random_graph(n, p, seed)
    g.check()
    assert int(g.degrees().sum()) == 2 * g.num_edges
    path = tmp_path_factory.mktemp("rt") / "e.txt"
    write_edge_list(g, path)
    assert load_edge_list(path, num_nodes=n) == g


def test_symmetry_exhaustive():
    g = random_graph(60, 0.1, 3)
    adj = {v: set(g.neighbors(v).tolist()) for v in range(g.num_nodes)}
    for v, nb in adj.items():
        for u in nb:
            assert v in adj[u]


def test_load_features(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("1,0\n0,1\n1,1")
    f = load_features(p, 3)
    assert f.dim == 2
    assert f.values.tolist() == [[1, 0], [0, 1], [1, 1]]
    assert not f.missing_mask.any()


def test_load_features_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ShapeError):
        load_features(empty, 0)
    ragged = tmp_path / "r.csv"
    ragged.write_text("1,2\n3\n")
    with pytest.raises(ShapeError, match="row 1"):
        load_features(ragged, 2)
    short = tmp_path / "s.csv"
    short.write_text("1,2\n3,4\n")
    with pytest.raises(ShapeError, match="expected 3"):
        load_features(short, 3)


def test_load_labels_both_layouts(tmp_path):
    a = tmp_path / "a.csv"
    a.write_text("1\n0\n2\n")
    b = tmp_path / "b.csv"
    b.write_text("2,2\n0,1\n1,0\n")
    assert load_labels(a, 3).labels.tolist() == [1, 0, 2]
    assert load_labels(b, 3).labels.tolist() == [1, 0, 2]
    assert load_labels(a).num_classes == 3


def test_label_vector_needs_two_classes():
    with pytest.raises(ParameterError):
        LabelVector(np.zeros(4, dtype=int))


def test_feature_matrix_frozen():
    f = FeatureMatrix(np.ones((2, 2)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 3.0


def test_sbm_trivial():
    g, f, y = synth_sbm(2, 1, p_in=1.0, p_out=0.0, feature_dim=2)
    assert g.num_nodes == 2 and g.num_edges == 0
    assert y.labels.tolist() == [0, 1]


def test_sbm_intra_edge_count_within_4_sigma():
    g, _, y = synth_sbm(3, 50, p_in=0.2, p_out=0.01, seed=7)
    e = g.edge_array()
    intra = int((y.labels[e[:, 0]] == y.labels[e[:, 1]]).sum())
    trials = 3 * 50 * 49 // 2
    mean = trials * 0.2
    sigma = np.sqrt(trials * 0.2 * 0.8)
    assert mean == pytest.approx(735.0)
    assert abs(intra - mean) <= 4 * sigma


def test_sbm_deterministic():
    a = synth_sbm(3, 40, 0.2, 0.02, seed=11)
    b = synth_sbm(3, 40, 0.2, 0.02, seed=11)
    assert a[0] == b[0]
    assert np.array_equal(a[1].values, b[1].values)
    c = synth_sbm(3, 40, 0.2, 0.02, seed=12)
    assert not a[0] == c[0]


def test_sbm_centers_separated():
    _, f, y = synth_sbm(3, 400, 0.05, 0.0, feature_dim=5, center_separation=6.0, seed=1)
    centers = np.stack([f.values[y.labels == b].mean(axis=0) for b in range(3)])
    for a in range(3):
        for b in range(a + 1, 3):
            assert np.linalg.norm(centers[a] - centers[b]) == pytest.approx(6.0, abs=0.3)


def test_sbm_parameter_errors():
    with pytest.raises(ParameterError):
        synth_sbm(2, 5, p_in=0.1, p_out=0.1)
    with pytest.raises(ParameterError):
        synth_sbm(2, 5, p_in=0.5, p_out=0.1, center_separation=0)


def test_from_edges_no_warning_without_loops():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        Graph.from_edges([0], [1], 2)
