"""End-to-end runs: mask -> impute -> build views -> fuse -> K-means -> eval.

Every stage writes a ``manifest.json`` holding the full config, input and
output checksums and wall time; :func:`replay` reruns a pipeline from it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import ClusterReport, evaluate, kmeans, write_predictions
from .errors import ParameterError
from .graph import FeatureMatrix, Graph, LabelVector, load_edge_list, load_edge_list_remapped, load_features, load_labels
from .imputation import MissingSpec, impute, make_missing_mask
from .multiview import (
    ViewTensor,
    build_view_tensor,
    export_view_csv,
    fuse_concat,
    iter_views,
    propagation_views,
    read_view_tensor,
    write_view_tensor,
)

log = logging.getLogger(__name__)

TENSOR_FILE = "tensor.cmvnd"
PRED_FILE = "predictions.csv"
REPORT_TXT = "report.txt"
REPORT_JSON = "report.json"
MASK_FILE = "mask.csv"
MANIFEST = "manifest.json"


@dataclass
class PipelineConfig:
    edges: str | None = None
    features: str | None = None
    labels: str | None = None
    output_dir: str = "run"
    K: int = 7
    missing_rate: float = 0.6
    mask_seed: int = 0
    kmeans_seed: int = 0
    impute: str = "fp"
    fp_iters: int = 40
    fusion: str = "concat"
    view_mode: str = "diff"
    clusters: int | None = None
    max_iters: int = 300
    tol: float = 1e-4
    threads: int = 1
    remap: bool = False
    export_csv: bool = False

    def __post_init__(self):
        if self.K < 0:
            raise ParameterError(f"K must be >= 0, got {self.K}")
        if self.impute not in ("fp", "zero", "none"):
            raise ParameterError(f"unknown impute method {self.impute!r}")
        if self.view_mode not in ("diff", "prop"):
            raise ParameterError(f"unknown view mode {self.view_mode!r}")
        if self.fusion != "concat":
            raise ParameterError(f"unknown fusion {self.fusion!r}")
        if self.threads < 1:
            raise ParameterError("threads must be >= 1")
        MissingSpec(self.missing_rate, self.mask_seed)

    @classmethod
    def from_dict(cls, d: dict) -> PipelineConfig:
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


def effective_threads(requested: int) -> int:
    env = os.environ.get("HOPDIFF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"HOPDIFF_THREADS must be an integer, got {env!r}") from None
    return requested


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_manifest(outdir: Path, stage: str, config: PipelineConfig, inputs: dict, outputs: list[str], wall: float):
    manifest = {
        "stage": stage,
        "version": __version__,
        "config": asdict(config),
        "inputs": {k: {"path": str(v), "sha256": sha256_file(v)} for k, v in inputs.items() if v},
        "outputs": {name: sha256_file(outdir / name) for name in outputs},
        "wall_time_seconds": wall,
    }
    (outdir / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def load_inputs(config: PipelineConfig, need_labels: bool = False):
    if not config.edges or not config.features:
        raise ParameterError("both --edges and --features are required")
    if config.remap:
        graph, ids = load_edge_list_remapped(config.edges)
    else:
        graph, ids = load_edge_list(config.edges), None
    features = load_features(config.features, graph.num_nodes)
    labels = None
    if config.labels:
        labels = load_labels(config.labels, graph.num_nodes)
    elif need_labels:
        raise ParameterError("--labels is required for this command")
    return graph, features, labels, ids


def make_views(graph: Graph, features: FeatureMatrix, config: PipelineConfig) -> ViewTensor:
    if config.view_mode == "prop":
        return propagation_views(graph, features, config.K)
    return build_view_tensor(graph, features, config.K, threads=effective_threads(config.threads))


def _write_tensor(graph: Graph, features: FeatureMatrix, config: PipelineConfig, path: Path) -> None:
    shape = (config.K + 1, graph.num_nodes, features.dim)
    if config.view_mode == "prop":
        write_view_tensor(path, propagation_views(graph, features, config.K))
    else:
        views = iter_views(graph, features, config.K, threads=effective_threads(config.threads))
        write_view_tensor(path, views, shape=shape)


def run_preprocess(config: PipelineConfig) -> Path:
    """Build views from the given features as-is and write the tensor file."""
    t0 = time.perf_counter()
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    graph, features, _, ids = load_inputs(config)
    outputs = [TENSOR_FILE]
    _write_tensor(graph, features, config, outdir / TENSOR_FILE)
    if ids is not None:
        np.savetxt(outdir / "node_ids.csv", ids, fmt="%d")
        outputs.append("node_ids.csv")
    if config.export_csv:
        for p in export_view_csv(read_view_tensor(outdir / TENSOR_FILE), outdir / "views"):
            outputs.append(str(p.relative_to(outdir)))
    _write_manifest(outdir, "preprocess", config, {"edges": config.edges, "features": config.features}, outputs,
                    time.perf_counter() - t0)
    log.info("wrote %s", outdir / TENSOR_FILE)
    return outdir / TENSOR_FILE


def cluster_tensor(tensor: ViewTensor, config: PipelineConfig, labels: LabelVector | None) -> ClusterReport:
    k = config.clusters or (labels.num_classes if labels is not None else None)
    if k is None:
        raise ParameterError("number of clusters unknown: pass --clusters or --labels")
    fused = fuse_concat(tensor)
    res = kmeans(fused.values, k, seed=config.kmeans_seed, max_iters=config.max_iters, tol=config.tol)
    if labels is None:
        return ClusterReport(res.labels, None, None, None, None, res.n_iter, res.inertia)
    if len(labels) != tensor.num_nodes:
        raise ParameterError(f"{len(labels)} labels for {tensor.num_nodes} nodes")
    return evaluate(res.labels, labels.labels, res.n_iter, res.inertia)


def _write_report(outdir: Path, report: ClusterReport) -> list[str]:
    write_predictions(report.pred, outdir / PRED_FILE)
    (outdir / REPORT_TXT).write_text(report.to_text())
    (outdir / REPORT_JSON).write_text(report.to_json())
    return [PRED_FILE, REPORT_TXT, REPORT_JSON]


def run_cluster(config: PipelineConfig, tensor_path) -> ClusterReport:
    t0 = time.perf_counter()
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    tensor = read_view_tensor(tensor_path)
    labels = load_labels(config.labels, tensor.num_nodes) if config.labels else None
    report = cluster_tensor(tensor, config, labels)
    outputs = _write_report(outdir, report)
    _write_manifest(outdir, "cluster", config, {"tensor": str(tensor_path), "labels": config.labels}, outputs,
                    time.perf_counter() - t0)
    return report


def run_pipeline(config: PipelineConfig) -> ClusterReport:
    """mask -> impute -> views -> tensor file -> fuse -> K-means -> metrics.

    Clustering reads the tensor back from disk, so a pipeline run and a
    separate ``preprocess`` + ``cluster`` pair see identical float32 data.
    """
    t0 = time.perf_counter()
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    graph, features, labels, ids = load_inputs(config)
    outputs = []

    masked = make_missing_mask(features, MissingSpec(config.missing_rate, config.mask_seed))
    np.savetxt(outdir / MASK_FILE, np.flatnonzero(masked.missing_mask), fmt="%d")
    outputs.append(MASK_FILE)
    if config.impute == "fp" and config.missing_rate == 1.0:
        log.warning("missing rate is 1: feature propagation has no observed rows")
    filled = impute(graph, masked, config.impute, config.fp_iters)

    _write_tensor(graph, filled, config, outdir / TENSOR_FILE)
    outputs.append(TENSOR_FILE)
    report = cluster_tensor(read_view_tensor(outdir / TENSOR_FILE), config, labels)
    outputs += _write_report(outdir, report)
    if ids is not None:
        np.savetxt(outdir / "node_ids.csv", ids, fmt="%d")
        outputs.append("node_ids.csv")
    _write_manifest(outdir, "pipeline", config,
                    {"edges": config.edges, "features": config.features, "labels": config.labels}, outputs,
                    time.perf_counter() - t0)
    return report


def replay(manifest_path, output_dir=None) -> ClusterReport:
    """Rerun the pipeline recorded in a manifest, optionally elsewhere."""
    manifest = json.loads(Path(manifest_path).read_text())
    if manifest.get("stage") != "pipeline":
        raise ParameterError(f"can only replay pipeline manifests, got stage {manifest.get('stage')!r}")
    config = PipelineConfig.from_dict(manifest["config"])
    for name, meta in manifest["inputs"].items():
        if sha256_file(meta["path"]) != meta["sha256"]:
            log.warning("input %s changed since the recorded run", meta["path"])
    if output_dir is not None:
        config.output_dir = str(output_dir)
    return run_pipeline(config)
