"""Seeded K-means and external clustering metrics (ACC, NMI, ARI, macro-F1)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError, ShapeError


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int
    inertia_history: list[float] = field(default_factory=list)


@dataclass
class ClusterReport:
    """Metric fields are None when no ground truth was available, as are
    ``iterations_run``/``inertia`` for reports built from saved predictions."""

    pred: np.ndarray
    acc: float | None
    nmi: float | None
    ari: float | None
    f1: float | None
    iterations_run: int | None = None
    inertia: float | None = None

    def metrics(self) -> dict:
        d = asdict(self)
        d.pop("pred")
        return {k: v for k, v in d.items() if v is not None}

    def to_text(self) -> str:
        return "".join(f"{k}={_fmt(v)}\n" for k, v in self.metrics().items())

    def to_json(self) -> str:
        return json.dumps(self.metrics(), indent=2, sort_keys=True) + "\n"


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def standardize(x: np.ndarray) -> np.ndarray:
    """Zero-mean, unit-variance columns; constant columns become zero."""
    x = np.asarray(x, dtype=np.float64)
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    out = x - mu
    nz = sd > 0
    out[:, nz] /= sd[nz]
    out[:, ~nz] = 0.0
    return out


def _sq_dists(x: np.ndarray, x_sq: np.ndarray, c: np.ndarray) -> np.ndarray:
    d = x_sq[:, None] - 2.0 * (x @ c.T) + np.einsum("ij,ij->i", c, c)[None, :]
    np.maximum(d, 0.0, out=d)
    return d


def _plusplus(x: np.ndarray, x_sq: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(x, x_sq, x[chosen])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # all remaining points coincide with a chosen center
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rest[0])
        else:
            nxt = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        chosen.append(nxt)
        np.minimum(closest, _sq_dists(x, x_sq, x[[nxt]])[:, 0], out=closest)
    return x[chosen].copy()


def kmeans(
    data,
    k: int,
    seed: int = 0,
    max_iters: int = 300,
    tol: float = 1e-4,
    standardize_columns: bool = True,
) -> KMeansResult:
    """Lloyd iterations from k-means++ seeds.

    Assignment ties go to the lowest centroid index.  An empty cluster is
    re-seeded with the point farthest from its assigned centroid.  Stops
    when labels stop changing or the largest centroid move is below ``tol``.
    ``inertia_history[t]`` is the inertia of assignment step ``t``.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("data must be 2-D")
    n = x.shape[0]
    if k < 1 or k > n:
        raise ParameterError(f"need 1 <= k <= N={n}, got k={k}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("data contains non-finite values")
    if standardize_columns:
        x = standardize(x)

    rng = np.random.default_rng(seed)
    x_sq = np.einsum("ij,ij->i", x, x)
    centroids = _plusplus(x, x_sq, k, rng)
    history = []
    labels = None
    it = 0
    for it in range(1, max_iters + 1):
        d = _sq_dists(x, x_sq, centroids)
        new_labels = np.argmin(d, axis=1)
        point_cost = d[np.arange(n), new_labels]
        history.append(float(point_cost.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels

        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, x)
        new_centroids = centroids.copy()
        filled = counts > 0
        new_centroids[filled] = sums[filled] / counts[filled, None]
        if not filled.all():
            cost = np.einsum("ij,ij->i", x - new_centroids[labels], x - new_centroids[labels])
            for c in np.flatnonzero(~filled):
                far = int(np.argmax(cost))
                new_centroids[c] = x[far]
                cost[far] = -1.0
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if shift < tol:
            d = _sq_dists(x, x_sq, centroids)
            labels = np.argmin(d, axis=1)
            history.append(float(d[np.arange(n), labels].sum()))
            it += 1
            break

    return KMeansResult(labels.astype(np.int64), centroids, history[-1], it, history)


# ------------------------------------------------------------------ metrics


def _check_pair(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise ShapeError(f"length mismatch: {pred.shape[0]} predictions vs {truth.shape[0]} labels")
    if pred.size == 0:
        raise ShapeError("empty labelings")
    return pred, truth


def contingency(pred, truth) -> np.ndarray:
    """Counts ``table[i, j]`` of points in predicted cluster i and class j,
    over the distinct values actually present (sorted)."""
    pred, truth = _check_pair(pred, truth)
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(table, (p.ravel(), t.ravel()), 1)
    return table


def best_mapping(pred, truth) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cluster-to-class matching maximising matched points.

    Among equally good matchings, the one with the largest macro-F1 is
    taken, so the choice does not depend on how either side is labelled.
    Returns ``(cluster_rows, class_cols, table)``.
    """
    table = contingency(pred, truth)
    row_tot = table.sum(axis=1)
    col_tot = table.sum(axis=0)
    f1 = 2.0 * table / (row_tot[:, None] + col_tot[None, :])
    # integer counts dominate; summed F1 terms are < number of classes
    weight = table * float(table.shape[1] + 1) + f1
    rows, cols = linear_sum_assignment(weight, maximize=True)
    return rows, cols, table


def accuracy(pred, truth) -> float:
    rows, cols, table = best_mapping(pred, truth)
    return int(table[rows, cols].sum()) / int(table.sum())


def macro_f1(pred, truth) -> float:
    """Macro-F1 over ground-truth classes after optimal cluster matching.

    A class with no matched cluster scores 0.
    """
    rows, cols, table = best_mapping(pred, truth)
    row_tot = table.sum(axis=1)
    col_tot = table.sum(axis=0)
    total = Fraction(0)
    for r, c in zip(rows, cols):
        tp = int(table[r, c])
        total += Fraction(2 * tp, int(row_tot[r] + col_tot[c]))
    return float(total / table.shape[1])


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth) -> float:
    """Mutual information over the arithmetic mean of the two entropies."""
    table = contingency(pred, truth)
    n = int(table.sum())
    h_pred = _entropy(table.sum(axis=1), n)
    h_true = _entropy(table.sum(axis=0), n)
    if h_pred == 0.0 and h_true == 0.0:
        # both labelings constant: identical partitions, but 0/0 by formula
        return 0.0
    nz = table > 0
    pij = table[nz] / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0))[nz]
    mi = float((pij * (np.log(table[nz] * n) - np.log(outer))).sum())
    denom = 0.5 * (h_pred + h_true)
    return float(min(max(mi / denom, 0.0), 1.0))


def ari(pred, truth) -> float:
    """Adjusted Rand index from pair counts, in integer arithmetic."""
    table = contingency(pred, truth)
    n = int(table.sum())

    def pairs(a):
        a = a.astype(object)
        return int((a * (a - 1) // 2).sum())

    index = pairs(table.ravel())
    sa = pairs(table.sum(axis=1))
    sb = pairs(table.sum(axis=0))
    total = n * (n - 1) // 2
    num = 2 * (total * index - sa * sb)
    den = total * (sa + sb) - 2 * sa * sb
    if den == 0:
        # both partitions trivial in the same way; they agree perfectly
        return 1.0
    return num / den


def evaluate(pred, truth, iterations_run: int | None = None, inertia: float | None = None) -> ClusterReport:
    pred, truth = _check_pair(pred, truth)
    return ClusterReport(
        pred=pred,
        acc=accuracy(pred, truth),
        nmi=nmi(pred, truth),
        ari=ari(pred, truth),
        f1=macro_f1(pred, truth),
        iterations_run=iterations_run,
        inertia=inertia,
    )


def read_predictions(path) -> np.ndarray:
    """Read ``node,label`` rows written by :func:`write_predictions`."""
    arr = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
    if arr.shape[1] != 2 or not np.array_equal(np.sort(arr[:, 0]), np.arange(arr.shape[0])):
        raise ShapeError(f"{path}: expected node,label rows covering 0..N-1")
    out = np.empty(arr.shape[0], dtype=np.int64)
    out[arr[:, 0]] = arr[:, 1]
    return out


def write_predictions(pred, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, y in enumerate(np.asarray(pred)):
            fh.write(f"{i},{int(y)}\n")
