"""Empirical statistics of two-layer multiplexes.

Pairs are always common-node pairs indexed in common-node space
(0 .. common_count - 1). Distances are binned into left-closed
equal-width bins starting at zero.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import graph
from .geometry import NodeCoords, pairwise_distances
from .graph import EdgeLookup, PairSet


@dataclass(frozen=True)
class BinnedCurve:
    """Per-bin counts and sums over equal-width distance bins.

    ``sums`` holds success counts for probability curves and value sums
    for mean curves; either way ``estimate`` is ``sums / counts`` and is
    NaN in empty bins.
    """

    bin_width: float
    counts: np.ndarray
    sums: np.ndarray

    @property
    def n_bins(self) -> int:
        return int(self.counts.shape[0])

    @property
    def bin_left(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.bin_width

    @property
    def bin_right(self) -> np.ndarray:
        return self.bin_left + self.bin_width

    @property
    def bin_edges(self) -> np.ndarray:
        return np.arange(self.n_bins + 1) * self.bin_width

    @property
    def centers(self) -> np.ndarray:
        return self.bin_left + 0.5 * self.bin_width

    @property
    def estimate(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), np.nan)

    @property
    def populated(self) -> np.ndarray:
        return self.counts > 0

    def rows(self):
        est = self.estimate
        for k in range(self.n_bins):
            yield self.bin_left[k], self.bin_right[k], int(self.counts[k]), est[k]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            write_curve_csv(fh, self)


def write_curve_csv(fh, curve: BinnedCurve) -> None:
    out = csv.writer(fh, lineterminator="\n")
    out.writerow(["bin_left", "bin_right", "count", "estimate"])
    for left, right, count, est in curve.rows():
        out.writerow([repr(float(left)), repr(float(right)), count, "" if math.isnan(est) else repr(float(est))])


def bin_index(x, bin_width: float) -> np.ndarray:
    if not bin_width > 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    return np.floor(np.asarray(x, dtype=float) / bin_width).astype(np.int64)


def binned_sum(pairs: PairSet, distance, value, bin_width: float = 1.0, n_bins: int | None = None) -> BinnedCurve:
    """Bin ``value(i, j)`` by ``distance(i, j)`` over every pair of ``pairs``.

    ``distance`` and ``value`` are vectorised callables on index arrays.
    ``n_bins`` forces a minimum bin count so that several curves share a
    grid; it grows if a distance falls beyond it.
    """
    counts = np.zeros(n_bins or 0, dtype=np.int64)
    sums = np.zeros(n_bins or 0)
    for i, j in pairs.blocks():
        if i.size == 0:
            continue
        idx = bin_index(distance(i, j), bin_width)
        size = int(idx.max()) + 1
        if size > counts.size:
            counts = np.concatenate([counts, np.zeros(size - counts.size, dtype=np.int64)])
            sums = np.concatenate([sums, np.zeros(size - sums.size)])
        counts += np.bincount(idx, minlength=counts.size)
        sums += np.bincount(idx, weights=np.asarray(value(i, j), dtype=float), minlength=sums.size)
    return BinnedCurve(float(bin_width), counts, sums)


@dataclass(frozen=True)
class PairClassification:
    """Common-node pairs split by their layer-1 state: S_c, S_d and S_all."""

    connected: PairSet
    disconnected: PairSet
    all: PairSet

    def sets(self) -> dict:
        return {"c": self.connected, "d": self.disconnected, "all": self.all}


def classify_pairs(m) -> PairClassification:
    """Partition the common-node pairs of ``m`` by whether they are linked in layer 1."""
    n = m.common_count
    if n < 2:
        raise ValueError("need at least two common nodes")
    adj1 = m.common_layer1()
    return PairClassification(
        connected=PairSet.explicit(n, graph.edge_array(adj1)),
        disconnected=PairSet.absent(n, EdgeLookup(adj1)),
        all=PairSet.all_pairs(n),
    )


def _linked(adj):
    lookup = EdgeLookup(adj)
    return lambda i, j: lookup.contains(i, j)


def _distance(coords: NodeCoords):
    return lambda i, j: pairwise_distances(coords, i, j)


def trans_layer_probability(pairs: PairSet, coords1: NodeCoords, adj2, bin_width: float = 1.0,
                            n_bins: int | None = None) -> BinnedCurve:
    """Fraction of pairs linked in layer 2, binned on their layer-1 distance."""
    return binned_sum(pairs, _distance(coords1), _linked(adj2), bin_width, n_bins)


def within_layer_probability(pairs: PairSet, coords2: NodeCoords, adj2, bin_width: float = 1.0,
                             n_bins: int | None = None) -> BinnedCurve:
    """Fraction of pairs linked in layer 2, binned on their layer-2 distance."""
    return binned_sum(pairs, _distance(coords2), _linked(adj2), bin_width, n_bins)


def conditional_mean_distance(pairs: PairSet, coords1: NodeCoords, coords2: NodeCoords, bin_width: float = 1.0,
                              n_bins: int | None = None) -> BinnedCurve:
    """Mean layer-2 distance of pairs, binned on their layer-1 distance."""
    return binned_sum(pairs, _distance(coords1), _distance(coords2), bin_width, n_bins)


def _edge_keys(adj) -> np.ndarray:
    e = graph.edge_array(adj)
    return e[:, 0] * adj.shape[0] + e[:, 1]


def edge_overlap(m) -> float:
    """Common edges over the smaller common-node edge count of the two layers."""
    k1 = _edge_keys(m.common_layer1())
    k2 = _edge_keys(m.common_layer2())
    denom = min(k1.size, k2.size)
    if denom == 0:
        raise ValueError("edge overlap undefined: a layer has no edges among common nodes")
    return float(np.intersect1d(k1, k2, assume_unique=True).size / denom)


def estimate_w(curve: BinnedCurve, r_threshold: float, weighted: bool = False,
               min_count: int = 1) -> tuple[float, float]:
    """Plateau of a connected-set trans-layer curve beyond ``r_threshold``.

    Averages the per-bin estimates of bins whose left edge exceeds the
    threshold and that hold at least ``min_count`` pairs. Returns the
    mean and the (population) standard deviation; ``weighted=True``
    weights bins by their pair counts.
    """
    keep = (curve.bin_left > r_threshold) & (curve.counts >= max(min_count, 1))
    if np.count_nonzero(keep) < 2:
        raise ValueError(f"need at least 2 populated bins beyond r_threshold={r_threshold:g}")
    est = curve.estimate[keep]
    wts = curve.counts[keep].astype(float) if weighted else np.ones(est.size)
    mean = float(np.average(est, weights=wts))
    std = float(math.sqrt(np.average((est - mean) ** 2, weights=wts)))
    return mean, std


def local_clustering(adjacency) -> np.ndarray:
    """Local clustering coefficient per node; NaN for degree below 2."""
    a = sp.csr_array(adjacency, dtype=np.int64)
    k = graph.degrees(a)
    triangles = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(k >= 2, triangles / (k * (k - 1) / 2.0), np.nan)


def clustering_stats(adjacency) -> tuple[float, dict]:
    """Mean local clustering over nodes of degree >= 2, and its mean per degree."""
    c = local_clustering(adjacency)
    k = graph.degrees(adjacency)
    ok = k >= 2
    if not ok.any():
        return math.nan, {}
    by_degree = {}
    for deg in np.unique(k[ok]):
        by_degree[int(deg)] = float(c[k == deg].mean())
    return float(c[ok].mean()), by_degree


@dataclass(frozen=True)
class Ccdf:
    """Empirical complementary CDF P(X >= value) at each distinct value."""

    values: np.ndarray
    ccdf: np.ndarray
    median: float = math.nan

    @classmethod
    def of(cls, samples) -> "Ccdf":
        s = np.sort(np.asarray(samples, dtype=float))
        if s.size == 0:
            return cls(np.empty(0), np.empty(0))
        values, first = np.unique(s, return_index=True)
        return cls(values, 1.0 - first / s.size, float(np.median(s)))

    def __len__(self) -> int:
        return int(self.values.size)


def degree_product_ccdf(m) -> tuple[Ccdf, Ccdf]:
    """CCDFs of k x k' over persistent and non-persistent layer-2 links.

    Degrees are layer-2 degrees of the endpoints; a layer-2 edge is
    persistent when it was selected by link persistence.
    """
    if m.persistent_edges is None:
        raise ValueError("multiplex has no recorded persistent edges")
    k = graph.degrees(m.layer2)
    edges = graph.edge_array(m.layer2)
    n = m.n2
    pers = np.zeros(edges.shape[0], dtype=bool)
    if m.persistent_edges.size:
        keys = edges[:, 0] * n + edges[:, 1]
        pkeys = np.unique(m.persistent_edges[:, 0] * n + m.persistent_edges[:, 1])
        pers = np.isin(keys, pkeys)
    prod = k[edges[:, 0]].astype(float) * k[edges[:, 1]]
    return Ccdf.of(prod[pers]), Ccdf.of(prod[~pers])
