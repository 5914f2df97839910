"""Sparse undirected graphs and blockwise iteration over node pairs.

Adjacency matrices are symmetric ``scipy.sparse.csr_array`` objects with
int8 entries and an empty diagonal. Everything that touches all
N(N-1)/2 pairs walks them in lexicographic row blocks so memory stays
bounded at N ~ 10^4.
"""
from __future__ import annotations

from typing import Iterator

import numpy as np
import scipy.sparse as sp

DEFAULT_BLOCK = 1 << 21


def adjacency_from_edges(n: int, edges) -> sp.csr_array:
    """Build a simple undirected adjacency; self-loops and duplicates are dropped."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise ValueError("edge endpoint out of range")
    keep = edges[:, 0] != edges[:, 1]
    e = np.sort(edges[keep], axis=1)
    e = np.unique(e, axis=0)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    data = np.ones(rows.shape[0], dtype=np.int8)
    adj = sp.csr_array((data, (rows, cols)), shape=(n, n))
    adj.sort_indices()
    return adj


def edge_array(adj) -> np.ndarray:
    """Edges (i, j) with i < j, sorted lexicographically."""
    upper = sp.triu(sp.csr_array(adj), k=1, format="coo")
    e = np.column_stack([upper.row, upper.col]).astype(np.int64)
    order = np.lexsort((e[:, 1], e[:, 0]))
    return e[order]


def degrees(adj) -> np.ndarray:
    adj = sp.csr_array(adj)
    return np.diff(adj.indptr).astype(np.int64)


def edge_count(adj) -> int:
    return int(sp.csr_array(adj).nnz // 2)


def induced_subgraph(adj, nodes) -> sp.csr_array:
    nodes = np.asarray(nodes, dtype=np.int64)
    sub = sp.csr_array(adj)[nodes][:, nodes]
    sub = sp.csr_array(sub)
    sub.sort_indices()
    return sub


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


class EdgeLookup:
    """Vectorised membership test for unordered pairs."""

    def __init__(self, adj):
        self.n = adj.shape[0]
        e = edge_array(adj)
        self.keys = np.sort(e[:, 0] * self.n + e[:, 1])

    def contains(self, i, j) -> np.ndarray:
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        key = np.minimum(i, j) * self.n + np.maximum(i, j)
        if self.keys.size == 0:
            return np.zeros(key.shape, dtype=bool)
        pos = np.searchsorted(self.keys, key)
        pos = np.minimum(pos, self.keys.size - 1)
        return self.keys[pos] == key


def row_blocks(n: int, block: int = DEFAULT_BLOCK) -> Iterator[tuple[int, int]]:
    """Split rows 0..n-1 into ranges holding roughly ``block`` upper-triangle pairs each."""
    start = 0
    while start < n - 1:
        stop = start
        total = 0
        while stop < n - 1 and (total == 0 or total + (n - stop - 1) <= block):
            total += n - stop - 1
            stop += 1
        yield start, stop
        start = stop


def upper_pairs(n: int, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    """All pairs (i, j), start <= i < stop, i < j < n, in lexicographic order."""
    rows = np.arange(start, stop, dtype=np.int64)
    lengths = n - rows - 1
    i = np.repeat(rows, lengths)
    offsets = np.cumsum(lengths) - lengths
    j = np.arange(i.size, dtype=np.int64) - np.repeat(offsets, lengths) + i + 1
    return i, j


def iter_all_pairs(n: int, block: int = DEFAULT_BLOCK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    for start, stop in row_blocks(n, block):
        yield upper_pairs(n, start, stop)


class PairSet:
    """A set of unordered node pairs among ``n`` nodes.

    Either an explicit ``(m, 2)`` array of pairs, or implicitly the pairs
    satisfying a relation to a fixed edge set (``'all'`` pairs, or pairs
    ``'absent'`` from it). Implicit sets are never materialised unless
    asked for.
    """

    def __init__(self, n: int, pairs=None, *, complement_of: EdgeLookup | None = None, kind: str = "explicit"):
        self.n = n
        self.kind = kind
        self._lookup = complement_of
        if kind == "explicit":
            p = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
            self.pairs = np.sort(p, axis=1)
        elif kind in ("all", "absent"):
            self.pairs = None
        else:
            raise ValueError(f"unknown pair-set kind {kind!r}")

    @classmethod
    def explicit(cls, n, pairs):
        return cls(n, pairs)

    @classmethod
    def all_pairs(cls, n):
        return cls(n, kind="all")

    @classmethod
    def absent(cls, n, lookup: EdgeLookup):
        return cls(n, complement_of=lookup, kind="absent")

    def __len__(self) -> int:
        if self.kind == "explicit":
            return int(self.pairs.shape[0])
        total = pair_count(self.n)
        if self.kind == "all":
            return total
        return total - int(self._lookup.keys.size)

    def blocks(self, block: int = DEFAULT_BLOCK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        if self.kind == "explicit":
            for s in range(0, self.pairs.shape[0], block):
                chunk = self.pairs[s:s + block]
                yield chunk[:, 0], chunk[:, 1]
            return
        for i, j in iter_all_pairs(self.n, block):
            if self.kind == "absent":
                keep = ~self._lookup.contains(i, j)
                i, j = i[keep], j[keep]
            yield i, j

    def to_array(self) -> np.ndarray:
        parts = [np.column_stack([i, j]) for i, j in self.blocks()]
        if not parts:
            return np.empty((0, 2), dtype=np.int64)
        return np.concatenate(parts)
