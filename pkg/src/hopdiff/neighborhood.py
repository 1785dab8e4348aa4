"""Exact k-hop and k-differential-hop neighborhoods.

``D^k(v)`` is the set of nodes whose shortest-path distance from ``v`` is
exactly ``k``; ``N^k(v)`` is the union ``D^0(v) | ... | D^k(v)``.

Edges are unit weight, so a priority queue keyed on hop count pops nodes in
the same order as a FIFO queue and the whole search collapses to layered
BFS: expand the current frontier, discard anything already seen, and the
survivors are the next differential layer.  :func:`diff_hop_layers` does
exactly that with vectorised CSR gathers.  :func:`diff_hop_heap` keeps the
heap formulation (start node marked visited up front) as a second route.
"""

from __future__ import annotations

import heapq
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import ParameterError, RangeError
from .graph import Graph

_EMPTY = np.empty(0, dtype=np.int64)
_EMPTY.setflags(write=False)


@dataclass(frozen=True, eq=False)
class DiffHopLayers:
    source: int
    max_hop: int
    layers: tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.layers)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.layers[k]

    def sizes(self) -> np.ndarray:
        return np.array([layer.shape[0] for layer in self.layers], dtype=np.int64)

    def neighborhood(self, k: int) -> np.ndarray:
        return k_hop_neighborhood(self, k)

    def as_sets(self) -> list[set[int]]:
        return [set(map(int, layer)) for layer in self.layers]

    def __eq__(self, other):
        if not isinstance(other, DiffHopLayers):
            return NotImplemented
        return (
            self.source == other.source
            and self.max_hop == other.max_hop
            and all(np.array_equal(a, b) for a, b in zip(self.layers, other.layers))
        )

    __hash__ = None


def _check(graph: Graph, v: int, max_hop: int) -> None:
    if not 0 <= v < graph.num_nodes:
        raise RangeError(f"node {v} outside [0, {graph.num_nodes})")
    if max_hop < 0:
        raise ParameterError(f"max_hop must be >= 0, got {max_hop}")


def _gather(indptr: np.ndarray, indices: np.ndarray, frontier: np.ndarray) -> np.ndarray:
    """Concatenated neighbor lists of ``frontier`` nodes."""
    starts = indptr[frontier]
    lens = indptr[frontier + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return _EMPTY
    # offset of each frontier node's block inside the output
    block = np.repeat(starts - np.cumsum(lens) + lens, lens)
    return indices[block + np.arange(total)]


def _layers(graph: Graph, v: int, max_hop: int, seen: np.ndarray) -> tuple[np.ndarray, ...]:
    # ``seen`` must be all-False on entry and is restored before returning
    indptr, indices = graph.indptr, graph.indices
    frontier = np.array([v], dtype=np.int64)
    seen[v] = True
    out = [frontier]
    touched = [frontier]
    for _ in range(max_hop):
        if frontier.shape[0] == 0:
            out.append(_EMPTY)
            continue
        nbrs = _gather(indptr, indices, frontier)
        nbrs = nbrs[~seen[nbrs]]
        frontier = np.unique(nbrs)
        seen[frontier] = True
        out.append(frontier)
        touched.append(frontier)
    for t in touched:
        seen[t] = False
    return tuple(out)


def diff_hop_layers(graph: Graph, v: int, max_hop: int) -> DiffHopLayers:
    """Layers ``D^0(v) .. D^max_hop(v)``, each sorted ascending.

    Layers past the reachable radius are present and empty.
    """
    _check(graph, v, max_hop)
    seen = np.zeros(graph.num_nodes, dtype=bool)
    return DiffHopLayers(v, max_hop, _layers(graph, v, max_hop, seen))


def iter_diff_hop_layers(
    graph: Graph, max_hop: int, sources: Iterable[int] | None = None
) -> Iterator[DiffHopLayers]:
    """Layers for many sources, reusing one visited buffer (O(N) state)."""
    if max_hop < 0:
        raise ParameterError(f"max_hop must be >= 0, got {max_hop}")
    seen = np.zeros(graph.num_nodes, dtype=bool)
    for v in range(graph.num_nodes) if sources is None else sources:
        v = int(v)
        _check(graph, v, max_hop)
        yield DiffHopLayers(v, max_hop, _layers(graph, v, max_hop, seen))


def layer_csr(
    graph: Graph, max_hop: int, sources: np.ndarray | None = None, threads: int = 1
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per hop ``k = 0..max_hop``, ``D^k`` of every source as CSR rows.

    Returns ``(indptr, members)`` pairs: row ``i`` (the ``i``-th source) is
    ``members[indptr[i]:indptr[i+1]]``, sorted ascending.  Output does not
    depend on ``threads``.
    """
    if sources is None:
        sources = np.arange(graph.num_nodes, dtype=np.int64)
    sources = np.asarray(sources, dtype=np.int64)
    id_type = np.int32 if graph.num_nodes < 2**31 else np.int64

    def run(chunk: np.ndarray):
        sizes = np.zeros((max_hop + 1, chunk.shape[0]), dtype=np.int64)
        members = [[] for _ in range(max_hop + 1)]
        for i, lay in enumerate(iter_diff_hop_layers(graph, max_hop, chunk)):
            for k, layer in enumerate(lay.layers):
                if layer.shape[0]:
                    sizes[k, i] = layer.shape[0]
                    members[k].append(layer.astype(id_type))
        return sizes, [np.concatenate(m) if m else np.empty(0, id_type) for m in members]

    threads = max(1, min(int(threads), max(1, sources.shape[0])))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, np.array_split(sources, threads)))
    else:
        results = [run(sources)]

    out = []
    for k in range(max_hop + 1):
        sizes = np.concatenate([r[0][k] for r in results])
        indptr = np.zeros(sizes.shape[0] + 1, dtype=np.int64)
        np.cumsum(sizes, out=indptr[1:])
        members = np.concatenate([r[1][k] for r in results])
        out.append((indptr, members))
    return out


def k_hop_neighborhood(layers: DiffHopLayers, k: int) -> np.ndarray:
    """``N^k(v)`` as a sorted id array, including the source itself."""
    if not 0 <= k <= layers.max_hop:
        raise RangeError(f"k={k} outside [0, {layers.max_hop}]")
    return np.sort(np.concatenate(layers.layers[: k + 1]))


def diff_hop_heap(graph: Graph, v: int, k: int) -> set[int]:
    """``D^k(v)`` by hop-keyed heap search."""
    _check(graph, v, k)
    visited = {v}
    pq = [(0, v)]
    found = set()
    while pq:
        hops, u = heapq.heappop(pq)
        if hops > k:
            break
        if hops == k:
            found.add(u)
            continue
        for w in graph.neighbors(u).tolist():
            if w not in visited:
                visited.add(w)
                heapq.heappush(pq, (hops + 1, w))
    return found


def bfs_distances(graph: Graph, v: int) -> np.ndarray:
    """Hop distances from ``v`` (float64; ``inf`` where unreachable)."""
    if not 0 <= v < graph.num_nodes:
        raise RangeError(f"node {v} outside [0, {graph.num_nodes})")
    dist = np.full(graph.num_nodes, np.inf)
    dist[v] = 0
    queue = deque([v])
    indptr, indices = graph.indptr, graph.indices
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in indices[indptr[u]:indptr[u + 1]]:
            if dist[w] == np.inf:
                dist[w] = du
                queue.append(w)
    return dist
