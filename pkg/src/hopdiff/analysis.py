"""Feature-access redundancy of layered message passing, and preprocessing
cost measurement."""

from __future__ import annotations

import resource
import sys
import time
import tracemalloc
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError
from .graph import FeatureMatrix, Graph
from .multiview import build_view_tensor
from .neighborhood import iter_diff_hop_layers


@dataclass(frozen=True)
class RedundancyReport:
    k: int
    delta: float
    gnn_accesses: float
    cmvnd_accesses: float

    @property
    def ratio(self) -> float:
        return self.gnn_accesses / self.cmvnd_accesses

    def to_text(self) -> str:
        return (
            f"k={self.k}\ndelta={self.delta!r}\ngnn_accesses={self.gnn_accesses!r}\n"
            f"cmvnd_accesses={self.cmvnd_accesses!r}\nratio={self.ratio!r}\n"
        )


def redundancy_ratio(k: int, delta: float) -> RedundancyReport:
    """Closed form with ``|D^i(v)| ~ delta**i``.

    A k-layer message-passing model touches hop ``i`` in ``k - i + 1``
    layers; one-pass differential aggregation touches it once.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not delta > 0:
        raise ParameterError(f"delta must be > 0, got {delta}")
    gnn = 0.0
    once = 0.0
    for i in range(1, k + 1):
        term = float(delta) ** i
        gnn += (k - i + 1) * term
        once += term
    return RedundancyReport(k, float(delta), gnn, once)


@dataclass(frozen=True)
class AccessCounts:
    K: int
    num_sources: int
    gnn_accesses: int
    cmvnd_accesses: int

    @property
    def ratio(self) -> float:
        return self.gnn_accesses / self.cmvnd_accesses if self.cmvnd_accesses else 1.0


def empirical_access_counts(graph: Graph, K: int, sample) -> AccessCounts:
    """Both access counts from measured layer sizes, summed over ``sample``."""
    sample = np.asarray(sample, dtype=np.int64)
    if sample.size == 0:
        raise ParameterError("sample must be non-empty")
    weights = np.arange(K, 0, -1, dtype=np.int64)  # K - i + 1 for i = 1..K
    gnn = 0
    once = 0
    for layers in iter_diff_hop_layers(graph, K, sample):
        sizes = layers.sizes()[1:]
        gnn += int((weights * sizes).sum())
        once += int(sizes.sum())
    return AccessCounts(K, int(sample.size), gnn, once)


@dataclass
class BenchReport:
    dataset: str
    num_nodes: int
    num_edges: int
    K: int
    threads: int
    wall_time_seconds: float
    peak_memory_mb: float
    traced_peak_mb: float

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in asdict(self).items())

    def csv_header(self) -> str:
        return ",".join(asdict(self)) + "\n"

    def csv_row(self) -> str:
        return ",".join(str(v) for v in asdict(self).values()) + "\n"


def peak_rss_mb() -> float:
    """Process resident-set high-water mark in MB."""
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # bytes on macOS, kilobytes on Linux
    return peak / 2**20 if sys.platform == "darwin" else peak / 1024


def bench_preprocess(
    graph: Graph,
    features: FeatureMatrix,
    K: int,
    dataset: str = "",
    threads: int = 1,
    trace_memory: bool = False,
) -> BenchReport:
    """Time the view-tensor build.

    ``peak_memory_mb`` is the whole-process RSS high-water mark, so it
    includes whatever the process held before the call.  With
    ``trace_memory`` a second, traced build reports the allocation peak of
    the build alone in ``traced_peak_mb`` (NaN otherwise); tracing is kept
    out of the timed run because it slows allocation-heavy code.
    """
    t0 = time.perf_counter()
    build_view_tensor(graph, features, K, threads=threads)
    elapsed = time.perf_counter() - t0
    traced = float("nan")
    if trace_memory:
        tracemalloc.start()
        try:
            build_view_tensor(graph, features, K, threads=threads)
            traced = tracemalloc.get_traced_memory()[1] / 2**20
        finally:
            tracemalloc.stop()
    return BenchReport(
        dataset=dataset,
        num_nodes=graph.num_nodes,
        num_edges=graph.num_edges,
        K=K,
        threads=threads,
        wall_time_seconds=elapsed,
        peak_memory_mb=peak_rss_mb(),
        traced_peak_mb=traced,
    )
