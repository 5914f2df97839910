import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmmlp import graph
from gmmlp.coupling import CorrelationParams
from gmmlp.generator import (
    Multiplex,
    apply_link_persistence,
    calibrate_mean_degree,
    common_layer1_edges,
    generate_gmm,
    generate_h2,
    generate_layer,
)
from gmmlp.geometry import NodeCoords, derive_params, sample_coords


def _same(a, b):
    return (a != b).nnz == 0


def test_zero_temperature_pair_within_radius_connects():
    p = derive_params(2, 1.0, 2.5, 0.0)
    c = NodeCoords(np.array([0.3 * p.disc_radius, 0.3 * p.disc_radius]), np.array([0.0, 1.0]))
    for seed in range(5):
        assert graph.edge_count(generate_layer(p, c, np.random.default_rng(seed))) == 1


def test_layer_is_simple_and_thread_invariant():
    p = derive_params(1500, 8, 2.5, 0.5)
    coords, adj = generate_h2(p, np.random.default_rng(3))
    assert adj.diagonal().sum() == 0
    assert (adj != adj.T).nnz == 0
    assert adj.max() == 1
    again = generate_layer(p, coords, _replay_after_coords(p, 3), threads=4)
    assert _same(adj, again)


def _replay_after_coords(p, seed):
    # the generator state generate_h2 has after drawing the coordinates
    rng = np.random.default_rng(seed)
    sample_coords(p, rng)
    return rng


def test_generation_is_deterministic():
    p1 = derive_params(800, 6, 2.6, 0.4)
    p2 = derive_params(600, 5, 2.3, 0.3)
    corr = CorrelationParams(0.5, 0.5, 600)
    a = generate_gmm(p1, p2, corr, 500, np.random.default_rng(11))
    b = generate_gmm(p1, p2, corr, 500, np.random.default_rng(11))
    assert _same(a.layer1, b.layer1) and _same(a.layer2, b.layer2)
    np.testing.assert_array_equal(a.coords2.radial, b.coords2.radial)


def test_gmm_strong_coupling_copies_coordinates():
    p = derive_params(1000, 6, 2.5, 0.5)
    m = generate_gmm(p, p, CorrelationParams(0.999, 1.0, 1000), 1000, np.random.default_rng(2))
    assert np.quantile(np.abs(m.coords1.radial - m.coords2.radial), 0.99) < 0.1
    np.testing.assert_array_equal(m.coords1.angular, m.coords2.angular)


def test_gmm_weak_coupling_uncorrelated():
    p = derive_params(5000, 6, 2.5, 0.5)
    m = generate_gmm(p, p, CorrelationParams(1e-6, 1e-6, 5000), 5000, np.random.default_rng(4))
    assert abs(np.corrcoef(m.coords1.radial, m.coords2.radial)[0, 1]) < 0.05
    # circular correlation of two angle samples
    a = m.coords1.angular - np.angle(np.mean(np.exp(1j * m.coords1.angular)))
    b = m.coords2.angular - np.angle(np.mean(np.exp(1j * m.coords2.angular)))
    rho = np.sum(np.sin(a) * np.sin(b)) / math.sqrt(np.sum(np.sin(a) ** 2) * np.sum(np.sin(b) ** 2))
    assert abs(rho) < 0.05


def test_gmm_layer_sizes_and_common_map():
    p1 = derive_params(700, 6, 2.5, 0.5)
    p2 = derive_params(900, 6, 2.5, 0.5)
    m = generate_gmm(p1, p2, CorrelationParams(0.5, 0.5, 900), 650, np.random.default_rng(0))
    assert m.n1 == 700 and m.n2 == 900 and m.common_count == 650
    np.testing.assert_array_equal(m.node_map[:, 0], np.arange(650))
    with pytest.raises(ValueError):
        generate_gmm(p1, p2, CorrelationParams(0.5, 0.5, 900), 800, np.random.default_rng(0))


@pytest.fixture(scope="module")
def small_gmm():
    p = derive_params(1200, 8, 2.5, 0.5)
    return generate_gmm(p, p, CorrelationParams(0.5, 0.5, 1200), 1000, np.random.default_rng(21))


def test_persistence_extremes(small_gmm):
    m0 = apply_link_persistence(small_gmm, 0.0, np.random.default_rng(0))
    assert _same(m0.layer2, small_gmm.layer2)
    assert m0.persistent_edges.shape == (0, 2)
    m1 = apply_link_persistence(small_gmm, 1.0, np.random.default_rng(0))
    e = common_layer1_edges(small_gmm)
    look = graph.EdgeLookup(m1.common_layer2())
    assert look.contains(e[:, 0], e[:, 1]).all()
    with pytest.raises(ValueError):
        apply_link_persistence(small_gmm, 1.2, np.random.default_rng(0))


def test_persistent_edges_invariants(small_gmm):
    m = apply_link_persistence(small_gmm, 0.4, np.random.default_rng(5))
    pe = m.persistent_edges
    assert graph.EdgeLookup(m.layer2).contains(pe[:, 0], pe[:, 1]).all()
    inv = np.full(m.n2, -1)
    inv[m.node_map[:, 1]] = m.node_map[:, 0]
    assert graph.EdgeLookup(m.layer1).contains(inv[pe[:, 0]], inv[pe[:, 1]]).all()
    added = graph.edge_count(m.layer2) - graph.edge_count(small_gmm.layer2)
    assert 0 <= added <= pe.shape[0]


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_persistence_selections_are_nested(small_gmm, w_a, w_b):
    lo, hi = sorted((w_a, w_b))
    a = apply_link_persistence(small_gmm, lo, np.random.default_rng(9)).persistent_edges
    b = apply_link_persistence(small_gmm, hi, np.random.default_rng(9)).persistent_edges
    ka = set(map(tuple, a))
    assert ka <= set(map(tuple, b))


def test_persistence_count_concentration():
    n = 3000
    edges = np.array([(2 * k, 2 * k + 1) for k in range(1000)])
    adj1 = graph.adjacency_from_edges(n, edges)
    empty = graph.adjacency_from_edges(n, np.empty((0, 2), dtype=np.int64))
    idx = np.arange(n)
    m = Multiplex(adj1, empty, None, None, np.column_stack([idx, idx]))
    band = 3 * math.sqrt(1000 * 0.4 * 0.6)
    for seed in range(5):
        k = apply_link_persistence(m, 0.4, np.random.default_rng(seed)).persistent_edges.shape[0]
        assert abs(k - 400) <= band


def test_calibration_inverts_point_value():
    k2 = calibrate_mean_degree(10.0, 8.0, 0.4, 10_000)
    assert k2 + 0.4 * 8.0 * (1 - k2 / 10_000) == pytest.approx(10.0)
    with pytest.raises(ValueError):
        calibrate_mean_degree(2.0, 8.0, 0.5, 10_000)
