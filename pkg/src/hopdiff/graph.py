"""Graph and attribute containers, file ingestion and SBM fixtures.

Graphs are undirected, unweighted and stored in CSR form (``indptr`` of
length N+1, sorted ``indices`` of length 2|E|).  Node ids are dense and
0-based; use :func:`load_edge_list_remapped` for files with sparse ids.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError, ParseError, RangeError, ShapeError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indptr", _frozen(np.asarray(self.indptr, dtype=np.int64)))
        object.__setattr__(self, "indices", _frozen(np.asarray(self.indices, dtype=np.int64)))
        if self.indptr.shape != (self.num_nodes + 1,):
            raise ShapeError(f"indptr must have length {self.num_nodes + 1}, got {self.indptr.shape[0]}")
        if self.indptr[0] != 0 or self.indptr[-1] != self.indices.shape[0]:
            raise ShapeError("indptr does not span indices")

    @classmethod
    def from_edges(cls, src, dst, num_nodes: int | None = None) -> Graph:
        """Symmetrize, deduplicate and sort an edge list.

        Self-loops are dropped with a warning stating how many were removed.
        """
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ShapeError("src and dst must have equal length")
        if num_nodes is None:
            num_nodes = int(max(src.max(initial=-1), dst.max(initial=-1))) + 1
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= num_nodes):
            raise RangeError(f"node id outside [0, {num_nodes})")

        loops = src == dst
        n_loops = int(loops.sum())
        if n_loops:
            warnings.warn(f"dropped {n_loops} self-loop(s)", stacklevel=2)
            src, dst = src[~loops], dst[~loops]

        rows = np.concatenate([src, dst])
        cols = np.concatenate([dst, src])
        # unique on the flattened key sorts by (row, col)
        keys = np.unique(rows * num_nodes + cols)
        rows, cols = np.divmod(keys, num_nodes)
        indptr = np.zeros(num_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=num_nodes), out=indptr[1:])
        return cls(num_nodes, indptr, cols)

    @property
    def num_edges(self) -> int:
        return self.indices.shape[0] // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def max_degree(self) -> int:
        return int(self.degrees().max(initial=0))

    @property
    def mean_degree(self) -> float:
        return self.indices.shape[0] / self.num_nodes if self.num_nodes else 0.0

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_array(self) -> np.ndarray:
        """Each undirected edge once as ``(u, v)`` with ``u < v``, sorted."""
        rows = np.repeat(np.arange(self.num_nodes, dtype=np.int64), self.degrees())
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def adjacency(self, dtype=np.float64) -> sp.csr_matrix:
        data = np.ones(self.indices.shape[0], dtype=dtype)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.num_nodes, self.num_nodes))

    def check(self) -> None:
        """Exhaustively verify the CSR invariants; raises InvariantError."""
        from .errors import InvariantError

        idx, ptr, n = self.indices, self.indptr, self.num_nodes
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise InvariantError("neighbor id out of range")
        rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(ptr))
        if np.any(rows == idx):
            raise InvariantError("self-loop present")
        # strictly increasing within each row => sorted and duplicate-free
        same_row = rows[1:] == rows[:-1]
        if np.any(idx[1:][same_row] <= idx[:-1][same_row]):
            raise InvariantError("neighbor list unsorted or duplicated")
        fwd = np.sort(rows * n + idx)
        bwd = np.sort(idx * n + rows)
        if not np.array_equal(fwd, bwd):
            raise InvariantError("adjacency not symmetric")
        if int(np.diff(ptr).sum()) != 2 * self.num_edges:
            raise InvariantError("degree sum != 2|E|")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Dense N x d attributes plus a node-level missing mask.

    Rows flagged in ``missing_mask`` hold zeros until imputed.
    """

    values: np.ndarray
    missing_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeError(f"features must be 2-D, got shape {values.shape}")
        mask = self.missing_mask
        if mask is None:
            mask = np.zeros(values.shape[0], dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (values.shape[0],):
            raise ShapeError("missing_mask length must equal the number of rows")
        if not np.all(np.isfinite(values)):
            raise ShapeError("features contain non-finite values")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "missing_mask", _frozen(mask))

    @property
    def num_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def observed(self) -> np.ndarray:
        return ~self.missing_mask

    @property
    def num_missing(self) -> int:
        return int(self.missing_mask.sum())


@dataclass(frozen=True, eq=False)
class LabelVector:
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or not np.issubdtype(labels.dtype, np.integer):
            raise ShapeError("labels must be a 1-D integer vector")
        if labels.size and labels.min() < 0:
            raise RangeError("labels must be non-negative")
        object.__setattr__(self, "labels", _frozen(labels.astype(np.int64)))
        if self.num_classes < 2:
            raise ParameterError("need at least two ground-truth classes")

    @property
    def num_classes(self) -> int:
        return int(self.labels.max(initial=-1)) + 1

    def __len__(self):
        return self.labels.shape[0]


# ---------------------------------------------------------------- file I/O


def _parse_lines(path: Path, delimiter: str | None, convert, what: str):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            toks = s.split(delimiter)
            try:
                rows.append([convert(t) for t in toks])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad {what} token in {s!r}") from None
    return rows


def read_edge_pairs(path) -> np.ndarray:
    """Read ``u v`` pairs (E x 2 int64); '#' lines and blank lines skipped."""
    path = Path(path)
    edges = np.empty((0, 2), dtype=np.int64)
    with open(path, encoding="utf-8") as fh:
        rows = []
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            toks = s.split()
            if len(toks) != 2:
                raise ParseError(f"{path}:{lineno}: expected two node ids, got {len(toks)} token(s)")
            try:
                u, v = int(toks[0]), int(toks[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-integer node id in {s!r}") from None
            if u < 0 or v < 0:
                raise ParseError(f"{path}:{lineno}: negative node id in {s!r}")
            rows.append((u, v))
    if rows:
        edges = np.asarray(rows, dtype=np.int64)
    return edges


def load_edge_list(path, num_nodes: int | None = None) -> Graph:
    edges = read_edge_pairs(path)
    if num_nodes is not None and edges.size and edges.max() >= num_nodes:
        bad = int(np.argmax((edges >= num_nodes).any(axis=1)))
        raise RangeError(f"{path}: edge {tuple(edges[bad])} has id >= num_nodes={num_nodes}")
    return Graph.from_edges(edges[:, 0], edges[:, 1], num_nodes)


def load_edge_list_remapped(path) -> tuple[Graph, np.ndarray]:
    """Load a file with arbitrary non-negative ids; returns the graph and
    ``original_ids`` such that dense node ``i`` was ``original_ids[i]``."""
    edges = read_edge_pairs(path)
    original_ids, dense = np.unique(edges, return_inverse=True)
    dense = dense.reshape(edges.shape)
    return Graph.from_edges(dense[:, 0], dense[:, 1], original_ids.shape[0]), original_ids


def write_edge_list(graph: Graph, path) -> None:
    edges = graph.edge_array()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes={graph.num_nodes} edges={graph.num_edges}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def load_features(path, expected_nodes: int) -> FeatureMatrix:
    rows = _parse_lines(Path(path), ",", float, "feature")
    if not rows:
        raise ShapeError(f"{path}: no feature rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ShapeError(f"{path}: row {i} has {len(r)} columns, expected {width}")
    if len(rows) != expected_nodes:
        raise ShapeError(f"{path}: {len(rows)} rows, expected {expected_nodes}")
    return FeatureMatrix(np.asarray(rows, dtype=np.float64))


def write_features(features: FeatureMatrix | np.ndarray, path) -> None:
    values = features.values if isinstance(features, FeatureMatrix) else np.asarray(features)
    np.savetxt(path, values, delimiter=",", fmt="%.17g")


def load_labels(path, expected_nodes: int | None = None) -> LabelVector:
    """One label per row, or ``node,label`` rows in any order."""
    rows = _parse_lines(Path(path), ",", int, "label")
    if not rows:
        raise ShapeError(f"{path}: no label rows")
    width = len(rows[0])
    if width not in (1, 2) or any(len(r) != width for r in rows):
        raise ShapeError(f"{path}: label rows must all have 1 or 2 columns")
    arr = np.asarray(rows, dtype=np.int64)
    if width == 2:
        order = np.argsort(arr[:, 0], kind="stable")
        if not np.array_equal(arr[order, 0], np.arange(arr.shape[0])):
            raise ShapeError(f"{path}: node ids must cover 0..N-1 exactly once")
        labels = arr[order, 1]
    else:
        labels = arr[:, 0]
    if expected_nodes is not None and labels.shape[0] != expected_nodes:
        raise ShapeError(f"{path}: {labels.shape[0]} labels, expected {expected_nodes}")
    return LabelVector(labels)


def write_labels(labels, path, with_ids: bool = False) -> None:
    labels = labels.labels if isinstance(labels, LabelVector) else np.asarray(labels)
    with open(path, "w", encoding="utf-8") as fh:
        for i, y in enumerate(labels):
            fh.write(f"{i},{int(y)}\n" if with_ids else f"{int(y)}\n")


# ------------------------------------------------------------- SBM fixture


def _sample_pairs(rng: np.random.Generator, n_pairs: int, p: float) -> np.ndarray:
    """Indices of successes among ``n_pairs`` Bernoulli(p) trials."""
    if n_pairs == 0 or p == 0.0:
        return np.empty(0, dtype=np.int64)
    if p == 1.0:
        return np.arange(n_pairs, dtype=np.int64)
    count = int(rng.binomial(n_pairs, p))
    return np.sort(rng.choice(n_pairs, size=count, replace=False))


def _triangle_pairs(flat: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row i owns pairs (i, i+1..n-1); starts[i] is its first flat index
    counts = np.arange(n - 1, -1, -1, dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    i = np.searchsorted(starts, flat, side="right") - 1
    j = flat - starts[i] + i + 1
    return i, j


def synth_sbm(
    blocks: int,
    nodes_per_block: int,
    p_in: float,
    p_out: float = 0.0,
    feature_dim: int = 16,
    center_separation: float = 4.0,
    seed: int = 0,
) -> tuple[Graph, FeatureMatrix, LabelVector]:
    """Planted-partition graph with Gaussian block features.

    Block ``b`` owns nodes ``b*nodes_per_block .. (b+1)*nodes_per_block-1``.
    Centers are scaled basis vectors, so every pair of centers is exactly
    ``center_separation`` apart; features add unit-variance noise.
    """
    if not 0.0 <= p_out < p_in <= 1.0:
        raise ParameterError(f"need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}")
    if center_separation <= 0:
        raise ParameterError("center_separation must be positive")
    if blocks < 2 or nodes_per_block < 1:
        raise ParameterError("need blocks >= 2 and nodes_per_block >= 1")
    if feature_dim < blocks:
        raise ParameterError("feature_dim must be >= blocks to place separated centers")

    rng = np.random.default_rng(seed)
    m = nodes_per_block
    src, dst = [], []
    for a in range(blocks):
        i, j = _triangle_pairs(_sample_pairs(rng, m * (m - 1) // 2, p_in), m)
        src.append(i + a * m)
        dst.append(j + a * m)
        for b in range(a + 1, blocks):
            flat = _sample_pairs(rng, m * m, p_out)
            i, j = np.divmod(flat, m)
            src.append(i + a * m)
            dst.append(j + b * m)
    n = blocks * m
    graph = Graph.from_edges(np.concatenate(src), np.concatenate(dst), n)

    labels = np.repeat(np.arange(blocks, dtype=np.int64), m)
    centers = np.zeros((blocks, feature_dim))
    centers[np.arange(blocks), np.arange(blocks)] = center_separation / math.sqrt(2.0)
    values = centers[labels] + rng.standard_normal((n, feature_dim))
    return graph, FeatureMatrix(values), LabelVector(labels)
