import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hopdiff.clustering import (
    ClusterReport,
    accuracy,
    ari,
    evaluate,
    kmeans,
    macro_f1,
    nmi,
    read_predictions,
    standardize,
    write_predictions,
)
from hopdiff.errors import ParameterError, ShapeError

from metric_oracles import acc_oracle, ari_oracle, canonical_labelings, f1_candidates, nmi_oracle

labelings = st.integers(1, 12).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 3), min_size=n, max_size=n),
                        st.lists(st.integers(0, 3), min_size=n, max_size=n))
)


def test_two_pairs():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    res = kmeans(x, 2, seed=0, standardize_columns=False)
    assert res.labels[0] == res.labels[1] != res.labels[2] == res.labels[3]
    # each pair: two points 0.5 from their midpoint
    assert res.inertia == pytest.approx(4 * 0.25, abs=1e-12)


def test_k_equals_n():
    x = np.random.default_rng(0).standard_normal((6, 3))
    res = kmeans(x, 6, seed=1)
    assert sorted(res.labels.tolist()) == list(range(6))
    assert res.inertia == pytest.approx(0.0, abs=1e-12)


def test_k_one():
    x = np.random.default_rng(0).standard_normal((20, 3)) + 5
    res = kmeans(x, 1, standardize_columns=False)
    assert np.all(res.labels == 0)
    np.testing.assert_allclose(res.centroids[0], x.mean(axis=0), rtol=1e-12)
    std = kmeans(x, 1)
    np.testing.assert_allclose(std.centroids[0], 0.0, atol=1e-12)


def test_kmeans_parameter_errors():
    x = np.zeros((3, 2))
    with pytest.raises(ParameterError):
        kmeans(x, 0)
    with pytest.raises(ParameterError):
        kmeans(x, 4)


def test_standardize_constant_column():
    x = np.array([[1.0, 3.0], [2.0, 3.0], [3.0, 3.0]])
    z = standardize(x)
    np.testing.assert_allclose(z.mean(axis=0), 0, atol=1e-15)
    assert z[:, 1].tolist() == [0, 0, 0]
    assert z[:, 0].std() == pytest.approx(1.0)


def test_kmeans_deterministic_and_inertia_monotone():
    rng = np.random.default_rng(4)
    x = np.concatenate([rng.standard_normal((60, 5)) + c for c in (0, 3, 6)])
    a = kmeans(x, 3, seed=9)
    b = kmeans(x, 3, seed=9)
    assert np.array_equal(a.labels, b.labels) and a.inertia_history == b.inertia_history
    h = a.inertia_history
    for prev, cur in zip(h, h[1:]):
        assert cur <= prev * (1 + 1e-12)


def test_empty_cluster_reseeded():
    # duplicate points force k-means++ to reuse a location; every cluster must survive
    x = np.array([[0.0], [0.0], [0.0], [5.0], [9.0]])
    res = kmeans(x, 3, seed=0, standardize_columns=False)
    assert len(set(res.labels.tolist())) == 3


def test_accuracy_examples():
    y = np.array([0, 0, 1, 1, 2])
    assert accuracy(y, y) == 1.0
    assert accuracy(np.array([2, 2, 0, 0, 1]), y) == 1.0
    assert accuracy([0, 0, 1, 1], [0, 1, 1, 1]) == 0.75 == acc_oracle([0, 0, 1, 1], [0, 1, 1, 1])


def test_perfect_and_constant():
    y = np.array([0, 0, 1, 1, 2, 2])
    assert nmi(y, y) == pytest.approx(1.0, abs=1e-12)
    assert ari(y, y) == 1.0 and macro_f1(y, y) == 1.0
    truth = np.array([0, 0, 1, 1])
    const = np.zeros(4, dtype=int)
    assert ari(const, truth) == 0.0
    assert nmi(const, truth) == 0.0


def test_ari_pair_count_example():
    pred, truth = [0, 0, 1, 1], [0, 1, 0, 1]
    assert ari(pred, truth) == ari_oracle(pred, truth) == -0.5


def test_shape_errors():
    for fn in (accuracy, nmi, ari, macro_f1):
        with pytest.raises(ShapeError):
            fn([0, 1], [0, 1, 1])


def test_single_element():
    assert accuracy([0], [0]) == 1.0
    assert nmi([0], [0]) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_metrics_match_oracles_small(n):
    for pred in canonical_labelings(n, 3):
        for truth in canonical_labelings(n, 3):
            assert accuracy(pred, truth) == acc_oracle(pred, truth)
            assert ari(pred, truth) == ari_oracle(pred, truth)
            assert macro_f1(pred, truth) in {float(f) for f in f1_candidates(pred, truth)}
            assert nmi(pred, truth) == pytest.approx(nmi_oracle(pred, truth), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(labelings, st.permutations(range(4)), st.permutations(range(4)))
def test_relabeling_invariance(pt, perm_p, perm_t):
    pred, truth = map(np.array, pt)
    p2 = np.array(perm_p)[pred]
    t2 = np.array(perm_t)[truth]
    assert accuracy(p2, t2) == accuracy(pred, truth)
    assert ari(p2, t2) == ari(pred, truth)
    assert nmi(p2, t2) == pytest.approx(nmi(pred, truth), abs=1e-12)
    assert macro_f1(p2, t2) == pytest.approx(macro_f1(pred, truth), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 5), st.integers(1, 6), st.data())
def test_acc_lower_bound_balanced(k, per, data):
    truth = np.repeat(np.arange(k), per)
    pred = np.array(data.draw(st.lists(st.integers(0, k - 1), min_size=k * per, max_size=k * per)))
    assert accuracy(pred, truth) >= 1 / k


@settings(max_examples=100, deadline=None)
@given(labelings)
def test_metric_ranges(pt):
    pred, truth = pt
    assert 0 <= accuracy(pred, truth) <= 1
    assert 0 <= nmi(pred, truth) <= 1
    assert -1 <= ari(pred, truth) <= 1
    assert 0 <= macro_f1(pred, truth) <= 1


def test_report_and_prediction_io(tmp_path):
    rep = evaluate([0, 0, 1, 1], [1, 1, 0, 0], iterations_run=3, inertia=1.5)
    assert isinstance(rep, ClusterReport)
    text = rep.to_text()
    for key in ("acc=1.0", "nmi=", "ari=1.0", "f1=1.0", "iterations_run=3", "inertia=1.5"):
        assert key in text
    p = tmp_path / "pred.csv"
    write_predictions(rep.pred, p)
    assert p.read_text() == "0,0\n1,0\n2,1\n3,1\n"
    assert read_predictions(p).tolist() == [0, 0, 1, 1]
