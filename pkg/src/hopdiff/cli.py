"""Command-line entry point.

Exit codes: 0 success, 2 usage/parameter error, 3 data/format error,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import bench_preprocess, empirical_access_counts, redundancy_ratio
from .clustering import evaluate, read_predictions
from .errors import DataError, HopDiffError
from .graph import (
    FeatureMatrix,
    load_edge_list,
    load_edge_list_remapped,
    load_features,
    load_labels,
    synth_sbm,
    write_edge_list,
    write_features,
    write_labels,
)
from .imputation import MissingSpec, impute, make_missing_mask
from .neighborhood import diff_hop_layers
from .pipeline import (
    PipelineConfig,
    effective_threads,
    replay,
    run_cluster,
    run_pipeline,
    run_preprocess,
)

log = logging.getLogger("hopdiff")


def _load_graph(args):
    if getattr(args, "remap", False):
        graph, _ = load_edge_list_remapped(args.edges)
        return graph
    return load_edge_list(args.edges)


def _config(args) -> PipelineConfig:
    keys = (
        "edges", "features", "labels", "output_dir", "K", "missing_rate", "mask_seed", "kmeans_seed",
        "impute", "fp_iters", "view_mode", "clusters", "max_iters", "tol", "threads", "remap", "export_csv",
    )
    return PipelineConfig(**{k: getattr(args, k) for k in keys if hasattr(args, k)})


# ----------------------------------------------------------------- commands


def cmd_synth(args):
    graph, feats, labels = synth_sbm(
        args.blocks, args.nodes_per_block, args.p_in, args.p_out, args.feature_dim, args.separation, args.seed
    )
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(graph, out / "edges.txt")
    write_features(feats, out / "features.csv")
    write_labels(labels, out / "labels.csv")
    print(f"nodes={graph.num_nodes}\nedges={graph.num_edges}\ndim={feats.dim}\nclasses={labels.num_classes}")


def cmd_mask(args):
    feats = load_features(args.features, _count_rows(args.features))
    masked = make_missing_mask(feats, MissingSpec(args.missing_rate, args.mask_seed))
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_features(masked, out / "features_masked.csv")
    np.savetxt(out / "mask.csv", np.flatnonzero(masked.missing_mask), fmt="%d")
    print(f"masked={masked.num_missing}\nnodes={masked.num_nodes}")


def _count_rows(path) -> int:
    with open(path, encoding="utf-8") as fh:
        return sum(1 for line in fh if line.strip() and not line.startswith("#"))


def _read_mask(path, n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    ids = np.loadtxt(path, dtype=np.int64, ndmin=1)
    if ids.size and (ids.min() < 0 or ids.max() >= n):
        raise DataError(f"{path}: masked id outside [0, {n})")
    mask[ids] = True
    return mask


def cmd_impute(args):
    graph = _load_graph(args)
    feats = load_features(args.features, graph.num_nodes)
    mask = _read_mask(args.mask, graph.num_nodes) if args.mask else np.zeros(graph.num_nodes, dtype=bool)
    filled = impute(graph, FeatureMatrix(feats.values, mask), args.impute, args.fp_iters)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_features(filled, out / "features_imputed.csv")
    print(f"imputed_rows={int(mask.sum())}\nmethod={args.impute}")


def cmd_preprocess(args):
    path = run_preprocess(_config(args))
    print(f"tensor={path}")


def cmd_cluster(args):
    report = run_cluster(_config(args), args.tensor)
    sys.stdout.write(report.to_text())


def cmd_eval(args):
    pred = read_predictions(args.pred)
    truth = load_labels(args.labels, pred.shape[0])
    report = evaluate(pred, truth.labels)
    sys.stdout.write(report.to_json() if args.json else report.to_text())


def cmd_pipeline(args):
    if args.manifest:
        report = replay(args.manifest, args.output_dir if args.output_dir_given else None)
    else:
        report = run_pipeline(_config(args))
    sys.stdout.write(report.to_text())


def cmd_redundancy(args):
    if args.delta is not None:
        delta = args.delta
    elif args.edges:
        graph = _load_graph(args)
        delta = graph.max_degree if args.delta_mode == "max" else graph.mean_degree
    else:
        raise argparse.ArgumentTypeError("give --delta or --edges")
    sys.stdout.write(redundancy_ratio(args.k, delta).to_text())
    if args.edges:
        graph = _load_graph(args)
        n = graph.num_nodes if args.sample <= 0 else min(args.sample, graph.num_nodes)
        sample = np.random.default_rng(args.seed).choice(graph.num_nodes, size=n, replace=False)
        counts = empirical_access_counts(graph, args.k, np.sort(sample))
        print(f"empirical_gnn_accesses={counts.gnn_accesses}")
        print(f"empirical_cmvnd_accesses={counts.cmvnd_accesses}")
        print(f"empirical_ratio={counts.ratio!r}")


def cmd_bench(args):
    graph = _load_graph(args)
    feats = load_features(args.features, graph.num_nodes)
    report = bench_preprocess(graph, feats, args.K, dataset=args.name or Path(args.edges).stem,
                              threads=effective_threads(args.threads), trace_memory=args.trace_memory)
    sys.stdout.write(report.to_text())
    if args.csv:
        path = Path(args.csv)
        new = not path.exists()
        with open(path, "a", encoding="utf-8") as fh:
            if new:
                fh.write(report.csv_header())
            fh.write(report.csv_row())


def cmd_layers(args):
    graph = _load_graph(args)
    layers = diff_hop_layers(graph, args.node, args.K)
    for layer in layers.layers:
        print(" ".join(map(str, layer.tolist())))


# ------------------------------------------------------------------- parser


def _add_graph(p, features=True, labels=False):
    p.add_argument("--edges", required=True, help="edge list, one 'u v' pair per line")
    p.add_argument("--remap", action="store_true", help="remap sparse node ids to 0..N-1 (sorted)")
    if features:
        p.add_argument("--features", required=True, help="CSV feature matrix, row i = node i")
    if labels:
        p.add_argument("--labels", help="CSV ground-truth labels")


def _add_views(p):
    p.add_argument("-K", "--K", type=int, default=7, dest="K", help="number of differential hops (default 7)")
    p.add_argument("--view-mode", choices=("diff", "prop"), default="diff")
    p.add_argument("--threads", type=int, default=1, help="builder threads (env HOPDIFF_THREADS overrides)")


def _add_cluster(p):
    p.add_argument("--clusters", type=int, help="cluster count (default: number of label classes)")
    p.add_argument("--kmeans-seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-4)


def _add_missing(p):
    p.add_argument("--missing-rate", type=float, default=0.6)
    p.add_argument("--mask-seed", type=int, default=0)


def _add_impute(p):
    p.add_argument("--impute", choices=("fp", "zero", "none"), default="fp")
    p.add_argument("--fp-iters", type=int, default=40)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopdiff", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate an SBM fixture")
    p.add_argument("--blocks", type=int, default=3)
    p.add_argument("--nodes-per-block", type=int, default=100)
    p.add_argument("--p-in", type=float, default=0.1)
    p.add_argument("--p-out", type=float, default=0.005)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mask", help="hide whole feature rows")
    p.add_argument("--features", required=True)
    _add_missing(p)
    p.add_argument("-o", "--output-dir", required=True)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("impute", help="fill masked rows")
    _add_graph(p)
    p.add_argument("--mask", help="file of masked node ids, one per line")
    _add_impute(p)
    p.add_argument("-o", "--output-dir", required=True)
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("preprocess", help="build the multi-view tensor")
    _add_graph(p, labels=True)
    _add_views(p)
    p.add_argument("--export-csv", action="store_true", help="also write views/view_k.csv")
    p.add_argument("-o", "--output-dir", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("cluster", help="fuse views and run K-means")
    p.add_argument("--tensor", required=True)
    p.add_argument("--labels")
    _add_cluster(p)
    p.add_argument("-o", "--output-dir", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", help="score saved predictions")
    p.add_argument("--pred", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="mask, impute, preprocess, cluster and evaluate")
    p.add_argument("--edges")
    p.add_argument("--features")
    p.add_argument("--labels")
    p.add_argument("--remap", action="store_true")
    _add_views(p)
    _add_missing(p)
    _add_impute(p)
    _add_cluster(p)
    p.add_argument("--manifest", help="replay the run recorded in this manifest.json")
    p.add_argument("-o", "--output-dir", default=None)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("redundancy", help="feature-access redundancy ratio")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--edges", help="measure layer sizes on this graph as well")
    p.add_argument("--remap", action="store_true")
    p.add_argument("--delta-mode", choices=("mean", "max"), default="mean",
                   help="degree statistic used for delta when taken from --edges")
    p.add_argument("--sample", type=int, default=0, help="source sample size (0 = all nodes)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_redundancy)

    p = sub.add_parser("bench", help="time and memory of the view build")
    _add_graph(p)
    _add_views(p)
    p.add_argument("--name")
    p.add_argument("--trace-memory", action="store_true")
    p.add_argument("--csv", help="append a result row to this CSV")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("layers", help="print D^0..D^K of one node, one layer per line")
    _add_graph(p, features=False)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("-K", "--K", type=int, default=2, dest="K")
    p.set_defaults(func=cmd_layers)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "pipeline":
        args.output_dir_given = args.output_dir is not None
        if args.output_dir is None:
            args.output_dir = "run"
        if not args.manifest and not (args.edges and args.features):
            parser.error("pipeline needs --edges and --features, or --manifest")
    try:
        args.func(args)
    except HopDiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
