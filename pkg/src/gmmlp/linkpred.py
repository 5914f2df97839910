"""Trans-layer link prediction from layer-1 geometry and topology.

A common-node pair scores s = psi(x1) + (1 - psi(x1)) w a1, where x1 is
its layer-1 distance and a1 its layer-1 adjacency; pairs are ranked by
score against their layer-2 adjacency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .geometry import NodeCoords, pairwise_distances
from .graph import EdgeLookup, PairSet


@dataclass(frozen=True)
class PsiKind:
    """Distance term of the score: ``exp`` (e^-x), ``zero``, or ``const`` with value C in [0, 1)."""

    variant: str
    constant: float = 0.0

    def __post_init__(self):
        if self.variant not in ("exp", "zero", "const"):
            raise ValueError(f"unknown psi variant {self.variant!r}")
        if self.variant == "const" and not 0 <= self.constant < 1:
            raise ValueError(f"psi constant must lie in [0, 1), got {self.constant}")

    @classmethod
    def parse(cls, text: str) -> "PsiKind":
        """Parse ``exp``, ``zero`` or ``const:C``."""
        if text in ("exp", "zero"):
            return cls(text)
        if text.startswith("const:"):
            try:
                value = float(text.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad psi constant in {text!r}") from None
            return cls("const", value)
        raise ValueError(f"psi must be exp, zero or const:C, got {text!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.variant == "exp":
            return np.exp(-x)
        return np.full(x.shape, 0.0 if self.variant == "zero" else self.constant)

    def __str__(self) -> str:
        return f"const:{self.constant:g}" if self.variant == "const" else self.variant


@dataclass(frozen=True)
class ScoredPairs:
    """Scores and, once attached, layer-2 labels of a set of common-node pairs."""

    pairs: PairSet
    scores: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        if len(self.pairs) != self.scores.shape[0]:
            raise ValueError("pairs and scores differ in length")
        if self.labels is not None and self.labels.shape != self.scores.shape:
            raise ValueError("labels and scores differ in length")

    def with_labels(self, adj2) -> "ScoredPairs":
        return ScoredPairs(self.pairs, self.scores, pair_labels(self.pairs, adj2))


def _check_w(w):
    if not 0 <= w <= 1:
        raise ValueError(f"w must lie in [0, 1], got {w}")


def pair_labels(pairs: PairSet, adj) -> np.ndarray:
    lookup = EdgeLookup(adj)
    parts = [lookup.contains(i, j) for i, j in pairs.blocks()]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=bool)


def _features(coords1: NodeCoords, adj1, pairs: PairSet):
    lookup = EdgeLookup(adj1)
    xs, links = [], []
    for i, j in pairs.blocks():
        xs.append(pairwise_distances(coords1, i, j))
        links.append(lookup.contains(i, j))
    if not xs:
        return np.zeros(0), np.zeros(0, dtype=bool)
    return np.concatenate(xs), np.concatenate(links)


def score_from_features(x1, linked1, w: float, psi: PsiKind) -> np.ndarray:
    _check_w(w)
    p = psi(x1)
    return p + (1.0 - p) * w * np.asarray(linked1, dtype=float)


def score_pairs(coords1: NodeCoords, adj1, w: float, psi: PsiKind, pairs: PairSet | None = None) -> ScoredPairs:
    """Score every common-node pair (or the given ``pairs``) from layer 1."""
    _check_w(w)
    pairs = PairSet.all_pairs(len(coords1)) if pairs is None else pairs
    x1, a1 = _features(coords1, adj1, pairs)
    return ScoredPairs(pairs, score_from_features(x1, a1, w, psi))


def _split(sp_or_scores, labels):
    if isinstance(sp_or_scores, ScoredPairs):
        if sp_or_scores.labels is None:
            raise ValueError("scored pairs carry no labels")
        return np.asarray(sp_or_scores.scores, dtype=float), np.asarray(sp_or_scores.labels, dtype=bool)
    return np.asarray(sp_or_scores, dtype=float), np.asarray(labels, dtype=bool)


def auroc(sp, labels=None) -> float:
    """Rank-based AUROC; tied scores take their average rank (ties count 1/2).

    Accepts a labelled :class:`ScoredPairs` or ``(scores, labels)``.
    """
    s, y = _split(sp, labels)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC needs at least one positive and one negative")
    ranks = rankdata(s, method="average")
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def aupr(sp, labels=None) -> float:
    """Average precision over a descending-score sweep; tied scores enter as one block."""
    s, y = _split(sp, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("AUPR needs at least one positive")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of each block of equal scores
    ends = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    tp = np.cumsum(y)[ends].astype(float)
    seen = ends + 1.0
    recall = tp / n_pos
    precision = tp / seen
    return float(np.sum(np.diff(np.concatenate([[0.0], recall])) * precision))


def sweep_w(coords1: NodeCoords, adj1, adj2, psi: PsiKind, w_grid, pairs: PairSet | None = None):
    """(w, AUROC, AUPR) per grid value over common-node pairs.

    AUROC is reported as 0.5 when every score ties, by the tie convention.
    """
    pairs = PairSet.all_pairs(len(coords1)) if pairs is None else pairs
    x1, a1 = _features(coords1, adj1, pairs)
    y = pair_labels(pairs, adj2)
    rows = []
    for w in w_grid:
        s = score_from_features(x1, a1, float(w), psi)
        rows.append((float(w), auroc(s, y), aupr(s, y)))
    return rows


def null_auroc_band(n_pos: int, n_neg: int, k: float = 3.0) -> float:
    """k standard deviations of the AUROC of random scores (Hanley-McNeil at AUC = 1/2)."""
    return k * math.sqrt((n_pos + n_neg + 1) / (12.0 * n_pos * n_neg))
