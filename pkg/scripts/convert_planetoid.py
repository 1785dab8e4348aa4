#!/usr/bin/env python3
"""Convert a citation dataset to hopdiff's edges.txt / features.csv / labels.csv.

Two source layouts are understood:

* LINQS tarball contents: ``<name>.content`` (id, binary features, label)
  and ``<name>.cites`` (cited, citing).  Node order follows ``.content``.
* Planetoid pickles: ``ind.<name>.{x,tx,allx,y,ty,ally,graph,test.index}``.
  Node order is the usual one (train/val rows, then test rows by index).

    python scripts/convert_planetoid.py --linqs cora/ -o data/cora
    python scripts/convert_planetoid.py --planetoid planetoid/data --name cora -o data/cora
"""

import argparse
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from hopdiff.graph import FeatureMatrix, Graph, LabelVector, write_edge_list, write_features, write_labels


def from_linqs(directory: Path, name: str):
    content = directory / f"{name}.content"
    cites = directory / f"{name}.cites"
    ids, rows, classes = [], [], []
    with open(content, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if parts:
                ids.append(parts[0])
                rows.append(np.array(parts[1:-1], dtype=np.float64))
                classes.append(parts[-1])
    index = {pid: i for i, pid in enumerate(ids)}
    src, dst, dropped = [], [], 0
    with open(cites, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if len(parts) != 2:
                continue
            if parts[0] in index and parts[1] in index:
                src.append(index[parts[0]])
                dst.append(index[parts[1]])
            else:
                dropped += 1
    if dropped:
        print(f"skipped {dropped} citation(s) to papers without features", file=sys.stderr)
    names = sorted(set(classes))
    labels = np.array([names.index(c) for c in classes])
    return Graph.from_edges(src, dst, len(ids)), np.vstack(rows), labels, names


def _load_pickle(path: Path):
    with open(path, "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def from_planetoid(directory: Path, name: str):
    part = {k: _load_pickle(directory / f"ind.{name}.{k}") for k in ("x", "tx", "allx", "y", "ty", "ally", "graph")}
    test_idx = np.loadtxt(directory / f"ind.{name}.test.index", dtype=np.int64)
    lo, hi = test_idx.min(), test_idx.max()
    tx, ty = part["tx"], part["ty"]
    if hi - lo + 1 != tx.shape[0]:
        # some test ids have no row (citeseer): pad them with zeros
        full_x = sp.lil_matrix((hi - lo + 1, tx.shape[1]))
        full_x[np.sort(test_idx) - lo, :] = tx
        full_y = np.zeros((hi - lo + 1, ty.shape[1]))
        full_y[np.sort(test_idx) - lo, :] = ty
        tx, ty = full_x, full_y
    feats = sp.vstack([part["allx"], tx]).tolil()
    labels = np.vstack([part["ally"], ty])
    order = np.sort(test_idx)
    feats[test_idx, :] = feats[order, :]
    labels[test_idx, :] = labels[order, :]
    n = feats.shape[0]
    src = [u for u, nbrs in part["graph"].items() for _ in nbrs]
    dst = [v for nbrs in part["graph"].values() for v in nbrs]
    graph = Graph.from_edges(src, dst, max(n, max(src + dst) + 1))
    return graph, feats.toarray(), labels.argmax(axis=1), None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--linqs", type=Path, help="directory holding <name>.content and <name>.cites")
    src.add_argument("--planetoid", type=Path, help="directory holding ind.<name>.* files")
    ap.add_argument("--name", default="cora")
    ap.add_argument("-o", "--output-dir", type=Path, required=True)
    args = ap.parse_args(argv)

    if args.linqs:
        graph, feats, labels, names = from_linqs(args.linqs, args.name)
    else:
        graph, feats, labels, names = from_planetoid(args.planetoid, args.name)
    if feats.shape[0] != graph.num_nodes:
        pad = np.zeros((graph.num_nodes - feats.shape[0], feats.shape[1]))
        feats = np.vstack([feats, pad])
        labels = np.concatenate([labels, np.zeros(pad.shape[0], dtype=labels.dtype)])
    args.output_dir.mkdir(parents=True, exist_ok=True)
    write_edge_list(graph, args.output_dir / "edges.txt")
    write_features(FeatureMatrix(feats), args.output_dir / "features.csv")
    write_labels(LabelVector(labels), args.output_dir / "labels.csv")
    if names:
        (args.output_dir / "classes.txt").write_text("\n".join(names) + "\n")
    print(f"nodes={graph.num_nodes} edges={graph.num_edges} dim={feats.shape[1]} classes={labels.max() + 1}")


if __name__ == "__main__":
    main()
