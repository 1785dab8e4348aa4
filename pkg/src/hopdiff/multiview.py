"""Multi-view node representations from differential hop layers.

View 0 is the raw feature matrix; view ``k`` holds, for each node, the mean
feature vector over its exact-distance-``k`` layer (zeros when that layer is
empty).  Views are stacked into a ``(K+1, N, d)`` tensor.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from .errors import FormatError, ParameterError, RangeError, ShapeError
from .graph import FeatureMatrix, Graph
from .neighborhood import layer_csr

MAGIC = b"CMVND1\0\0"
_HEADER = struct.Struct("<8sIII")


@dataclass(frozen=True, eq=False)
class ViewTensor:
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise ShapeError(f"view tensor must be 3-D, got shape {data.shape}")
        if not np.issubdtype(data.dtype, np.floating):
            data = data.astype(np.float64)
        object.__setattr__(self, "data", data)

    @property
    def num_views(self) -> int:
        return self.data.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]

    def view(self, k: int) -> np.ndarray:
        return self.data[k]


def _values(features) -> np.ndarray:
    return features.values if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)


def aggregate_diff_hop(features, layer) -> np.ndarray:
    """Mean of the feature rows in ``layer``; zero vector if it is empty.

    Rows are summed in ascending node id order.
    """
    values = _values(features)
    ids = np.unique(np.asarray(list(layer) if isinstance(layer, (set, frozenset)) else layer, dtype=np.int64))
    if ids.size and (ids[0] < 0 or ids[-1] >= values.shape[0]):
        raise RangeError("layer contains ids outside the feature matrix")
    acc = np.zeros(values.shape[1])
    for u in ids:
        acc += values[u]
    if ids.size:
        acc /= ids.size
    return acc


def _mean_over(indptr: np.ndarray, members: np.ndarray, values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    # members are sorted within each row, so every output row accumulates
    # in ascending id order, matching aggregate_diff_hop term by term
    sel = sp.csr_matrix((np.ones(members.shape[0]), members, indptr), shape=(n, n))
    sel.has_sorted_indices = True
    sums = np.asarray(sel @ values)
    counts = np.diff(indptr)
    nz = counts > 0
    sums[nz] /= counts[nz, None]
    return sums


def iter_views(graph: Graph, features, K: int, threads: int = 1) -> Iterator[np.ndarray]:
    """Yield views ``0..K`` one at a time (each an N x d float64 array)."""
    if K < 0:
        raise ParameterError(f"K must be >= 0, got {K}")
    values = _values(features)
    if values.shape[0] != graph.num_nodes:
        raise ShapeError(f"features have {values.shape[0]} rows, graph has {graph.num_nodes} nodes")
    yield values.copy()
    if K == 0:
        return
    layers = layer_csr(graph, K, threads=threads)
    layers[0] = None
    for k in range(1, K + 1):
        indptr, members = layers[k]
        layers[k] = None
        yield _mean_over(indptr, members, values)


def build_view_tensor(graph: Graph, features, K: int, threads: int = 1) -> ViewTensor:
    views = iter_views(graph, features, K, threads=threads)
    first = next(views)
    data = np.empty((K + 1,) + first.shape)
    data[0] = first
    for k, view in enumerate(views, 1):
        data[k] = view
    return ViewTensor(data)


def propagation_views(graph: Graph, features, K: int) -> ViewTensor:
    """Views ``H, AH, A^2 H, ...`` with the raw (unnormalised) adjacency."""
    if K < 0:
        raise ParameterError(f"K must be >= 0, got {K}")
    values = _values(features)
    adj = graph.adjacency()
    data = np.empty((K + 1,) + values.shape)
    data[0] = values
    for k in range(1, K + 1):
        data[k] = adj @ data[k - 1]
    return ViewTensor(data)


def fuse_concat(tensor: ViewTensor) -> FeatureMatrix:
    """Row ``v`` becomes ``[view0[v] | view1[v] | ... | viewK[v]]``."""
    data = tensor.data
    fused = np.ascontiguousarray(data.transpose(1, 0, 2)).reshape(data.shape[1], -1)
    return FeatureMatrix(fused)


def split_concat(fused, num_views: int) -> ViewTensor:
    """Inverse of :func:`fuse_concat`."""
    values = _values(fused)
    n, width = values.shape
    if width % num_views:
        raise ShapeError(f"width {width} not divisible by {num_views} views")
    return ViewTensor(values.reshape(n, num_views, width // num_views).transpose(1, 0, 2).copy())


# ------------------------------------------------------------ binary format


def write_view_tensor(path, views: ViewTensor | Iterable[np.ndarray], shape: tuple[int, int, int] | None = None) -> None:
    """Write the CMVND1 format: 8-byte magic, u32 (views, nodes, dim),
    then float32 data view-major, node-major, feature-major; little-endian.

    ``views`` may be an iterator of per-view arrays when ``shape`` is given,
    so large tensors never need to be fully materialised.
    """
    if isinstance(views, ViewTensor):
        shape = views.data.shape
        views = iter(views.data)
    if shape is None:
        raise ParameterError("shape is required when writing from an iterator")
    nv, n, d = shape
    written = 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, nv, n, d))
        for view in views:
            view = np.asarray(view)
            if view.shape != (n, d):
                raise ShapeError(f"view {written} has shape {view.shape}, expected {(n, d)}")
            fh.write(np.ascontiguousarray(view, dtype="<f4").tobytes())
            written += 1
    if written != nv:
        raise ShapeError(f"wrote {written} views, header promised {nv}")


def read_view_tensor(path) -> ViewTensor:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, nv, n, d = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        body = fh.read()
    expected = nv * n * d * 4
    if len(body) != expected:
        raise FormatError(f"{path}: payload is {len(body)} bytes, expected {expected}")
    data = np.frombuffer(body, dtype="<f4").reshape(nv, n, d).astype(np.float32)
    return ViewTensor(data)


def export_view_csv(tensor: ViewTensor, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fmt = "%.9g" if tensor.data.dtype == np.float32 else "%.17g"
    paths = []
    for k in range(tensor.num_views):
        p = outdir / f"view_{k}.csv"
        np.savetxt(p, tensor.data[k], delimiter=",", fmt=fmt)
        paths.append(p)
    return paths
