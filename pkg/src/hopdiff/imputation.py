"""Node-level attribute masking and imputation."""

from __future__ import annotations

import math
from fractions import Fraction
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError, ShapeError
from .graph import FeatureMatrix, Graph


@dataclass(frozen=True)
class MissingSpec:
    rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ParameterError(f"missing rate must be in [0, 1], got {self.rate}")

    def count(self, num_nodes: int) -> int:
        # the shortest decimal for rate, so 0.29 * 100 gives 29, not 28
        return math.floor(Fraction(str(float(self.rate))) * num_nodes)


def make_missing_mask(features: FeatureMatrix, missing: MissingSpec) -> FeatureMatrix:
    """Hide exactly ``floor(rate * N)`` whole rows, chosen uniformly without
    replacement; hidden rows are zeroed."""
    if features.missing_mask.any():
        raise ParameterError("input already has missing rows")
    n = features.num_nodes
    hidden = np.random.default_rng(missing.seed).choice(n, size=missing.count(n), replace=False)
    mask = np.zeros(n, dtype=bool)
    mask[hidden] = True
    values = features.values.copy()
    values[mask] = 0.0
    return FeatureMatrix(values, mask)


def normalized_adjacency(graph: Graph) -> sp.csr_matrix:
    """``D^-1/2 A D^-1/2`` without self-loops; degree-0 rows stay zero."""
    deg = graph.degrees().astype(np.float64)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    rows = np.repeat(np.arange(graph.num_nodes), graph.degrees())
    data = inv_sqrt[rows] * inv_sqrt[graph.indices]
    return sp.csr_matrix((data, graph.indices, graph.indptr), shape=(graph.num_nodes,) * 2)


def fp_impute(
    graph: Graph,
    features: FeatureMatrix,
    iterations: int = 40,
    trace: list[float] | None = None,
) -> FeatureMatrix:
    """Feature propagation.

    Missing rows start at zero; each round diffuses ``X <- A_norm X`` and
    then restores observed rows to their input values.  When ``trace`` is a
    list, the Frobenius norm of each round's change on missing rows is
    appended to it.
    """
    if features.num_nodes != graph.num_nodes:
        raise ShapeError("feature rows and graph nodes differ")
    if iterations < 0:
        raise ParameterError("iterations must be >= 0")
    mask = features.missing_mask
    observed = features.values
    if not mask.any():
        return FeatureMatrix(observed.copy())
    if mask.all():
        warnings.warn("every row is missing; feature propagation has nothing to spread", stacklevel=2)

    adj = normalized_adjacency(graph)
    x = observed.copy()
    x[mask] = 0.0
    keep = ~mask
    for _ in range(iterations):
        nxt = adj @ x
        nxt[keep] = observed[keep]
        if trace is not None:
            trace.append(float(np.linalg.norm(nxt[mask] - x[mask])))
        x = nxt
    return FeatureMatrix(x)


def zero_impute(features: FeatureMatrix) -> FeatureMatrix:
    values = features.values.copy()
    values[features.missing_mask] = 0.0
    return FeatureMatrix(values)


def impute(graph: Graph, features: FeatureMatrix, method: str, iterations: int = 40) -> FeatureMatrix:
    if method == "fp":
        return fp_impute(graph, features, iterations)
    if method == "zero":
        return zero_impute(features)
    if method == "none":
        return features
    raise ParameterError(f"unknown imputation method {method!r}")
