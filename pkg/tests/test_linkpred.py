import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gmmlp import graph
from gmmlp.geometry import NodeCoords
from gmmlp.graph import PairSet
from gmmlp.linkpred import (
    PsiKind,
    ScoredPairs,
    aupr,
    auroc,
    null_auroc_band,
    score_from_features,
    score_pairs,
    sweep_w,
)

SCORE_X2_W038 = 0.46390787560669987
EXP = PsiKind("exp")


def test_score_examples():
    assert score_from_features(2.0, True, 0.38, EXP) == pytest.approx(SCORE_X2_W038, rel=1e-15)
    x = np.linspace(0, 30, 13)
    for w in (0.0, 0.5, 1.0):
        np.testing.assert_allclose(score_from_features(x, np.zeros(13, bool), w, EXP), np.exp(-x))
    np.testing.assert_array_equal(score_from_features(x, np.ones(13, bool), 1.0, EXP), 1.0)
    with pytest.raises(ValueError):
        score_from_features(x, np.ones(13, bool), 1.1, EXP)


def test_psi_parse():
    assert PsiKind.parse("exp") == EXP
    assert PsiKind.parse("const:0.3") == PsiKind("const", 0.3)
    assert str(PsiKind.parse("const:0.3")) == "const:0.3"
    for bad in ("lin", "const:x", "const:1.0"):
        with pytest.raises(ValueError):
            PsiKind.parse(bad)
    np.testing.assert_array_equal(PsiKind("const", 0.2)(np.array([1.0, 9.0])), [0.2, 0.2])


def test_score_pairs_geometry():
    # three nodes on a ray at radii 0, 1, 3: distances 1, 3, 2
    c = NodeCoords(np.array([0.0, 1.0, 3.0]), np.zeros(3))
    adj = graph.adjacency_from_edges(3, [(0, 2)])
    sp = score_pairs(c, adj, 0.5, EXP)
    np.testing.assert_allclose(sp.scores, [math.exp(-1), math.exp(-3) + (1 - math.exp(-3)) * 0.5, math.exp(-2)])
    labelled = sp.with_labels(graph.adjacency_from_edges(3, [(1, 2)]))
    np.testing.assert_array_equal(labelled.labels, [False, False, True])
    with pytest.raises(ValueError):
        score_pairs(c, adj, -0.1, EXP)


@given(st.one_of(st.just(0.0), st.floats(1e-6, 1)), st.floats(0, 30), st.floats(0, 30))
def test_score_monotonicity(w, xa, xb):
    lo, hi = sorted((xa, xb))
    for linked in (False, True):
        assert score_from_features(lo, linked, w, EXP) >= score_from_features(hi, linked, w, EXP)
    con = score_from_features(lo, True, w, EXP)
    dis = score_from_features(lo, False, w, EXP)
    assert con >= dis
    if w > 0 and math.exp(-lo) < 1:
        assert con > dis


@given(st.floats(1e-3, 1), st.floats(0, 30), st.floats(0, 30))
def test_threshold_property(w, a, b):
    # beyond ln(1/w) any connected pair outranks any disconnected one
    x_con = math.log(1 / w) + a
    x_dis = math.log(1 / w) + b
    assert score_from_features(x_con, True, w, EXP) >= score_from_features(x_dis, False, w, EXP)


def test_auroc_examples():
    assert auroc([0.9, 0.1], [1, 0]) == 1.0
    assert auroc([0.3, 0.3, 0.3, 0.3], [1, 0, 1, 0]) == 0.5
    assert auroc([0.5, 0.5, 0.1], [1, 0, 0]) == 0.75
    with pytest.raises(ValueError):
        auroc([0.2, 0.4], [1, 1])
    with pytest.raises(ValueError):
        auroc(ScoredPairs(PairSet.all_pairs(2), np.array([0.5])))


def test_aupr_examples():
    assert aupr([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0
    assert aupr([0.9, 0.8, 0.7], [1, 0, 1]) == pytest.approx(5 / 6, rel=1e-15)
    # a tie block is one step: precision 1/2 at recall 1
    assert aupr([0.5, 0.5], [1, 0]) == 0.5
    with pytest.raises(ValueError):
        aupr([0.1, 0.2], [0, 0])


def test_null_metrics():
    rng = np.random.default_rng(0)
    y = rng.random(10_000) < 0.1
    s = rng.random(10_000)
    assert aupr(s, y) == pytest.approx(y.mean(), abs=0.02)
    band = null_auroc_band(int(y.sum()), int((~y).sum()))
    assert abs(auroc(s, y) - 0.5) < band


def test_shuffled_labels_within_band():
    rng = np.random.default_rng(1)
    s = rng.normal(size=5000)
    y = s + rng.normal(size=5000) > 1.0
    shuffled = rng.permutation(y)
    assert abs(auroc(s, shuffled) - 0.5) <= null_auroc_band(int(y.sum()), int((~y).sum()))


@given(st.lists(st.integers(-40, 40), min_size=4, max_size=40), st.integers(0, 2**31))
def test_auroc_transform_invariant(scores, seed):
    s = np.array(scores) / 8.0
    y = np.random.default_rng(seed).random(s.size) < 0.5
    if y.all() or not y.any():
        y[0] = not y[0]
    assert auroc(np.exp(3 * s) + 1.0, y) == pytest.approx(auroc(s, y), abs=1e-12)


def test_order_independence():
    rng = np.random.default_rng(2)
    s = np.round(rng.random(300), 1)
    y = rng.random(300) < 0.3
    perm = rng.permutation(300)
    assert aupr(s[perm], y[perm]) == aupr(s, y)
    assert auroc(s[perm], y[perm]) == pytest.approx(auroc(s, y), abs=1e-15)


def test_sweep_zero_psi_ties():
    c = NodeCoords(np.array([0.0, 1.0, 3.0, 4.0]), np.zeros(4))
    adj1 = graph.adjacency_from_edges(4, np.empty((0, 2), dtype=np.int64))
    adj2 = graph.adjacency_from_edges(4, [(0, 1)])
    rows = sweep_w(c, adj1, adj2, PsiKind("zero"), [0.0, 0.5])
    assert [r[1] for r in rows] == [0.5, 0.5]
    assert rows[0][2] == pytest.approx(1 / 6)
