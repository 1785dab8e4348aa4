import math

import numpy as np
import pytest

from hopdiff.analysis import BenchReport, bench_preprocess, empirical_access_counts, redundancy_ratio
from hopdiff.errors import ParameterError
from hopdiff.graph import FeatureMatrix, Graph, synth_sbm

GRID_K = range(2, 11)
GRID_DELTA = (1.5, 2.0, 4.0, 8.0)


def test_closed_form_values():
    assert redundancy_ratio(2, 2).ratio == pytest.approx(8 / 6, abs=1e-12)
    r = redundancy_ratio(3, 3)
    assert (r.gnn_accesses, r.cmvnd_accesses) == (54.0, 39.0)
    assert r.ratio == pytest.approx(54 / 39, abs=1e-12)


@pytest.mark.parametrize("delta", [0.5, 1.0, 7.0])
def test_single_hop_ratio_is_one(delta):
    assert redundancy_ratio(1, delta).ratio == 1.0


@pytest.mark.parametrize("k,delta", [(0, 2.0), (-1, 2.0), (2, 0.0), (2, -1.0)])
def test_bad_parameters(k, delta):
    with pytest.raises(ParameterError):
        redundancy_ratio(k, delta)


@pytest.mark.parametrize("delta", GRID_DELTA)
def test_ratio_above_one_and_increasing(delta):
    ratios = [redundancy_ratio(k, delta).ratio for k in GRID_K]
    assert all(r > 1 for r in ratios)
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_ratio_falls_toward_one_as_delta_grows():
    # the outermost hop (weight 1) dominates both sums for large delta
    for k in GRID_K:
        ratios = [redundancy_ratio(k, d).ratio for d in GRID_DELTA]
        assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert redundancy_ratio(2, 3.0).ratio == pytest.approx(5 / 4, abs=1e-12)
    assert redundancy_ratio(5, 1e6).ratio == pytest.approx(1.0, abs=1e-5)


def test_report_text():
    text = redundancy_ratio(2, 2).to_text()
    assert "gnn_accesses=8.0" in text and "cmvnd_accesses=6.0" in text


def test_star_center():
    star = Graph.from_edges([0] * 5, [1, 2, 3, 4, 5])
    c = empirical_access_counts(star, 1, [0])
    assert (c.gnn_accesses, c.cmvnd_accesses, c.ratio) == (5, 5, 1.0)


def test_path_end():
    path = Graph.from_edges([0, 1, 2, 3], [1, 2, 3, 4])
    c = empirical_access_counts(path, 2, [0])
    assert (c.gnn_accesses, c.cmvnd_accesses, c.ratio) == (3, 2, 1.5)


def test_empirical_ratio_at_least_one():
    graph, _, _ = synth_sbm(3, 40, 0.1, 0.01, seed=2)
    for K in range(1, 6):
        c = empirical_access_counts(graph, K, np.arange(0, graph.num_nodes, 7))
        assert c.ratio >= 1
    closed = redundancy_ratio(3, graph.mean_degree).ratio
    measured = empirical_access_counts(graph, 3, np.arange(graph.num_nodes)).ratio
    assert 1 <= measured and math.isfinite(closed)


def test_empirical_empty_sample():
    with pytest.raises(ParameterError):
        empirical_access_counts(Graph.from_edges([0], [1]), 1, [])


def test_bench_sanity():
    graph, feats, _ = synth_sbm(2, 20, 0.3, 0.02, seed=0)
    rep = bench_preprocess(graph, feats, 3, dataset="tiny", trace_memory=True)
    assert isinstance(rep, BenchReport)
    assert rep.wall_time_seconds > 0 and rep.peak_memory_mb > 0 and rep.traced_peak_mb > 0
    assert (rep.num_nodes, rep.num_edges, rep.K) == (40, graph.num_edges, 3)
    assert rep.csv_header().count(",") == rep.csv_row().count(",")
    assert "dataset=tiny" in rep.to_text()


def test_bench_untraced_is_nan():
    g = Graph.from_edges([0], [1])
    rep = bench_preprocess(g, FeatureMatrix(np.ones((2, 2))), 1)
    assert math.isnan(rep.traced_peak_mb)
