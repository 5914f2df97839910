"""Acceptance criteria, one group of tests per criterion.

Each test carries ``@pytest.mark.acceptance(name)``; the terminal summary
prints one PASS/FAIL/SKIP line per criterion. Desk-scale runs are also
marked ``slow``.
"""
import math
import os
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, stats

from conftest import N_SYN, SYN_P1, SYN_P2
from gmmlp import analytics, graph, theory
from gmmlp.coupling import (
    CorrelationParams,
    conditional_angular_cdf,
    layer2_angular_distance,
    sample_conditional_radial,
)
from gmmlp.embedding import (
    EmbeddingConfig,
    conditional_layer2_log_likelihood,
    embed_layer,
    estimate_gamma,
    log_likelihood,
)
from gmmlp.generator import generate_gmm_lp, generate_h2
from gmmlp.geometry import (
    NodeCoords,
    connection_probability,
    derive_params,
    expected_degree_at_radius,
    hyperbolic_distance,
    pairwise_distances,
    radial_cdf,
    sample_radial,
)
from gmmlp.graph import PairSet
from gmmlp.linkpred import PsiKind, aupr, auroc, sweep_w

acc = pytest.mark.acceptance

REF_P1 = derive_params(5000, 6, 2.1, 0.5)
REF_P2 = derive_params(3000, 6, 2.5, 0.5)
REF_CORR = CorrelationParams(0.5, 0.7, 3000)


def _ks_to_grid(sample, grid, cdf):
    x = np.sort(sample)
    f = np.interp(x, grid, cdf)
    n = x.size
    return max(np.max(np.arange(1, n + 1) / n - f), np.max(f - np.arange(n) / n))


# --- parameter calibration ---------------------------------------------------------------------

@acc("parameter calibration")
def test_disc_radii_of_the_conditional_distance_example():
    assert REF_P1.disc_radius == pytest.approx(23.0, abs=0.1)
    assert REF_P2.disc_radius == pytest.approx(16.8, abs=0.1)


# --- generator calibration ---------------------------------------------------------------------

@acc("generator calibration")
@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_h2_layer_degree_and_tail(seed):
    p = derive_params(10_000, 10, 2.5, 0.5)
    _, adj = generate_h2(p, np.random.default_rng(seed))
    deg = graph.degrees(adj)
    assert deg.mean() == pytest.approx(10, abs=1)
    assert estimate_gamma(deg) == pytest.approx(2.5, abs=0.2)


# --- marginal preservation ---------------------------------------------------------------------

@acc("marginal preservation")
@pytest.mark.parametrize("nu", [0.0, 0.4, 0.9])
def test_conditional_radial_sampler_keeps_marginal(nu):
    rng = np.random.default_rng(1)
    r1 = sample_radial(REF_P1, rng, 100_000)
    r2 = sample_conditional_radial(r1, REF_P1, REF_P2, nu, rng)
    assert stats.kstest(r2, lambda r: radial_cdf(r, REF_P2)).statistic < 0.01


# --- conditional angular CDF -------------------------------------------------------------------

@acc("conditional angular CDF")
@pytest.mark.parametrize("dtheta1", [0.1, 0.5, 1.0, 2.0, 2.5, 3.0])
def test_conditional_angular_cdf_matches_sampling(dtheta1):
    corr = CorrelationParams(0.0, 0.5, 3000)
    rng = np.random.default_rng(2)
    theta = rng.random(100_000) * 2 * math.pi
    d2 = layer2_angular_distance(theta, np.mod(theta + dtheta1, 2 * math.pi), corr, rng)
    assert stats.kstest(d2, lambda x: conditional_angular_cdf(x, dtheta1, corr)).statistic < 0.01


# --- conditional hyperbolic CDF ----------------------------------------------------------------

@pytest.fixture(scope="module")
def ref_ctx():
    return theory.TheoryContext(REF_P1, REF_P2, REF_CORR, 0.0)


@acc("conditional hyperbolic CDF")
@pytest.mark.slow
@pytest.mark.parametrize("dtheta1", [0.1, 0.5, 1.5])
def test_conditional_distance_cdf_matches_sampling(ref_ctx, dtheta1):
    grid = np.arange(0.0, 2 * REF_P2.disc_radius + 0.025, 0.05)
    cdf = theory.conditional_hyperbolic_cdf(grid, 18.0, 20.0, dtheta1, ref_ctx)
    x2 = theory.empirical_conditional_x2(18.0, 20.0, dtheta1, ref_ctx, 100_000, np.random.default_rng(1))
    assert _ks_to_grid(x2, grid, cdf) < 0.02


@acc("conditional hyperbolic CDF")
@pytest.mark.slow
@pytest.mark.parametrize("dtheta1", [0.1, 0.5, 1.5])
def test_conditional_distance_pdf_normalised(ref_ctx, dtheta1):
    grid = np.arange(0.0, 2 * REF_P2.disc_radius + 0.05, 0.1)
    pdf = theory.conditional_hyperbolic_pdf(grid, 18.0, 20.0, dtheta1, ref_ctx)
    assert integrate.trapezoid(pdf, grid) == pytest.approx(1.0, abs=0.02)


# --- GMM-LP plateau ----------------------------------------------------------------------------

@acc("GMM-LP plateau")
@pytest.mark.slow
@pytest.mark.parametrize("w", [0.2, 0.4, 0.7])
def test_plateau_recovers_w(syn, w):
    m = syn.persisted(0.5, w)
    cur = analytics.trans_layer_probability(analytics.classify_pairs(m).connected, m.common_coords1(),
                                            m.common_layer2())
    est, _ = analytics.estimate_w(cur, float(m.coords2.radial.max()))
    assert est == pytest.approx(w, abs=0.05)


# --- uncorrelated p2_all prediction ------------------------------------------------------------

@acc("uncorrelated p2_all prediction")
@pytest.mark.slow
def test_p2_all_matches_uncorrelated_prediction():
    corr = CorrelationParams(1e-4, 1e-4, N_SYN)
    m = generate_gmm_lp(SYN_P1, SYN_P2, corr, N_SYN, 0.4, np.random.default_rng(11))
    # eta is the realised layer-1 link density
    k1 = 2 * graph.edge_count(m.layer1) / (N_SYN - 1)
    ctx = theory.TheoryContext(SYN_P1, SYN_P2, corr, 0.4, mean_degree1=k1)
    c2, a2 = m.common_coords2(), m.common_layer2()
    look = graph.EdgeLookup(a2)
    pairs = PairSet.all_pairs(N_SYN)

    def dist(i, j):
        return pairwise_distances(c2, i, j)

    def pred(i, j):
        return theory.p2_all_prediction(ctx, dist(i, j), "uncorrelated")

    emp = analytics.binned_sum(pairs, dist, look.contains)
    mean = analytics.binned_sum(pairs, dist, pred, n_bins=emp.n_bins)
    var = analytics.binned_sum(pairs, dist, lambda i, j: pred(i, j) * (1 - pred(i, j)), n_bins=emp.n_bins)
    # bins with enough expected links and non-links for a normal approximation
    ok = (mean.sums >= 5) & (emp.counts - mean.sums >= 5)
    assert ok.sum() >= 10
    z = (emp.sums[ok] - mean.sums[ok]) / np.sqrt(var.sums[ok])
    assert np.all(np.abs(z) < 3), z


# --- average-degree bounds ---------------------------------------------------------------------

@acc("average-degree bounds")
@pytest.mark.slow
@pytest.mark.parametrize("strength", [0.5, 0.7, 0.9])
def test_persisted_degree_within_bounds(syn, strength):
    base = syn.gmm(strength)
    k1 = graph.degrees(base.layer1).mean()
    k2 = graph.degrees(base.layer2).mean()
    k2_tilde = graph.degrees(syn.persisted(strength, 0.4).layer2).mean()
    assert k2 < k2_tilde < k2 + 0.4 * k1


# --- tail invariance ---------------------------------------------------------------------------

@acc("tail invariance")
@pytest.mark.slow
def test_layer2_tail_exponent_unchanged_by_persistence(syn):
    before, after = [], []
    for seed in range(5):
        before.append(estimate_gamma(graph.degrees(syn.gmm(0.5, seed).layer2)))
        after.append(estimate_gamma(graph.degrees(syn.persisted(0.5, 0.4, seed).layer2)))
    print(f"layer-2 exponent w=0: {np.round(before, 3)}, w=0.4: {np.round(after, 3)}")
    assert abs(np.mean(after) - np.mean(before)) < 0.2


# --- overlap monotonicity ----------------------------------------------------------------------

@acc("overlap monotonicity")
@pytest.mark.slow
def test_overlap_increases_with_w(syn):
    grid = [0.0, 0.2, 0.4, 0.7, 1.0]
    ov = [analytics.edge_overlap(syn.persisted(0.5, w)) for w in grid]
    assert np.all(np.diff(ov) > 0), ov
    assert ov[3] - ov[0] >= 0.2


# --- angular-integral identities ---------------------------------------------------------------

# (r, r') with r + r' - R in {2, 4, 6, 8}, symmetric and lopsided
def _grid(R):
    out = []
    for d in (2, 4, 6, 8):
        s = R + d
        out += [(s / 2, s / 2), (min(R, s - 2), s - min(R, s - 2))]
    return out


@acc("angular-integral identities")
@pytest.mark.parametrize("params", [SYN_P1, SYN_P2], ids=["T0.7", "T0.5"])
def test_mean_kernel_identity(params):
    R, t = params.disc_radius, params.temperature
    for r, rp in _grid(R):
        got = theory.angular_average(r, rp, R, t)
        assert got == pytest.approx(theory.angular_average_limit(r, rp, R, t), rel=0.01), (r, rp)


@acc("angular-integral identities")
@pytest.mark.parametrize("params", [SYN_P1, SYN_P2], ids=["T0.7", "T0.5"])
def test_squared_kernel_identity(params):
    R, t = params.disc_radius, params.temperature
    for r, rp in _grid(R):
        got = theory.angular_average(r, rp, R, t, power=2)
        assert got == pytest.approx(theory.angular_average_limit(r, rp, R, t, power=2), rel=0.01), (r, rp)


@acc("angular-integral identities")
def test_mixed_kernel_cauchy_schwarz():
    c = theory.temperature_ratio(SYN_P1.temperature, SYN_P2.temperature)
    factor = math.sqrt(c * (1 - SYN_P1.temperature) * (1 - SYN_P2.temperature))
    for r in np.linspace(1.0, SYN_P2.disc_radius, 8):
        lhs = theory.mixed_kernel_degree(r, SYN_P2, SYN_P1.temperature)
        assert lhs <= factor * expected_degree_at_radius(r, SYN_P2) * (1 + 1e-8)


# --- link prediction ---------------------------------------------------------------------------

@acc("link prediction")
def test_auroc_oracles():
    assert auroc([0.9, 0.7, 0.2, 0.1], [1, 1, 0, 0]) == 1.0
    assert auroc([0.5, 0.5, 0.1], [1, 0, 0]) == 0.75
    assert auroc([0.2, 0.6, 0.4], [1, 0, 1]) == 0.0
    assert auroc([0.6, 0.2, 0.4], [1, 0, 1]) == 1.0
    assert auroc([0.4, 0.4, 0.4], [1, 0, 1]) == 0.5
    assert aupr([0.9, 0.8, 0.7], [1, 0, 1]) == pytest.approx(5 / 6, rel=1e-15)
    rng = np.random.default_rng(0)
    s = rng.random(20_000)
    y = s + 0.3 * rng.normal(size=s.size) > 0.8
    assert auroc(s, rng.permutation(y)) == pytest.approx(0.5, abs=0.02)


@pytest.fixture(scope="module")
def lp_sweep():
    n = 3000
    p1 = derive_params(n, 8, 2.8, 0.7)
    p2 = derive_params(n, 8, 2.3, 0.5)
    m = generate_gmm_lp(p1, p2, CorrelationParams(0.5, 0.5, n), n, 0.4, np.random.default_rng(3))
    rows = sweep_w(m.common_coords1(), m.common_layer1(), m.common_layer2(), PsiKind("exp"),
                   [0.0, 0.01, 0.2, 0.5, 0.9])
    return {w: (a, p) for w, a, p in rows}


@acc("link prediction")
@pytest.mark.slow
def test_persistence_term_improves_aupr(lp_sweep):
    assert lp_sweep[0.2][1] > lp_sweep[0.0][1]


@acc("link prediction")
@pytest.mark.slow
def test_metrics_flat_in_w(lp_sweep):
    vals = np.array([lp_sweep[w] for w in (0.01, 0.2, 0.5, 0.9)])
    assert np.ptp(vals, axis=0).max() <= 0.01, vals


# --- embedding self-consistency ----------------------------------------------------------------

@pytest.fixture(scope="module")
def embedded():
    p = derive_params(2000, 10, 2.5, 0.5)
    _, adj = generate_h2(p, np.random.default_rng(0))
    hist = []
    coords = embed_layer(adj, p, EmbeddingConfig(candidate_angles=360, refinement_passes=2),
                         np.random.default_rng(1), hist)
    return p, adj, coords, hist


@acc("embedding self-consistency")
@pytest.mark.slow
def test_embedding_likelihood_never_decreases(embedded):
    _, _, _, hist = embedded
    assert len(hist) == 3 and all(b >= a for a, b in zip(hist, hist[1:]))


@acc("embedding self-consistency")
@pytest.mark.slow
def test_embedded_connection_probability(embedded):
    p, adj, coords, _ = embedded
    cur = analytics.within_layer_probability(PairSet.all_pairs(2000), coords, adj)
    ok = cur.counts >= 200
    x, est = cur.centers[ok], cur.estimate[ok]
    assert np.all(np.diff(est) <= 0), est
    k = int(np.flatnonzero(est < 0.5)[0])
    assert k > 0
    # linear interpolation of the crossing between adjacent populated bins
    cross = x[k - 1] + (est[k - 1] - 0.5) / (est[k - 1] - est[k]) * (x[k] - x[k - 1])
    assert abs(cross - p.disc_radius) <= 2


# --- conditional likelihood --------------------------------------------------------------------

@acc("conditional likelihood")
def test_conditional_likelihood_reduces_at_zero_persistence():
    p = derive_params(300, 6, 2.5, 0.5)
    c, adj2 = generate_h2(p, np.random.default_rng(4))
    _, adj1 = generate_h2(p, np.random.default_rng(5))
    assert conditional_layer2_log_likelihood(c, adj1, adj2, 0.0, p) == log_likelihood(c, adj2, p)


def _brute_conditional(coords, e1, e2, w, params):
    total = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            x = hyperbolic_distance(coords.radial[i], coords.angular[i], coords.radial[j], coords.angular[j])
            p2 = float(connection_probability(x, params))
            a1, a2 = (i, j) in e1, (i, j) in e2
            like = w * a1 * a2 + (1 - w * a1) * (p2 if a2 else 1 - p2)
            total += math.log(like)
    return total


@acc("conditional likelihood")
@pytest.mark.parametrize("w", [0.0, 0.3, 0.9])
def test_conditional_likelihood_brute_force(w):
    p = derive_params(4, 2.0, 2.5, 0.5)
    rng = np.random.default_rng(6)
    fixtures = [
        ({(0, 1), (1, 2)}, {(0, 1), (2, 3)}),
        ({(0, 1), (0, 2), (0, 3)}, {(0, 2), (1, 3)}),
        ({(0, 3)}, {(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}),
    ]
    for e1, e2 in fixtures:
        c = NodeCoords(rng.uniform(0, p.disc_radius, 4), rng.uniform(0, 2 * math.pi, 4))
        a1 = graph.adjacency_from_edges(4, sorted(e1))
        a2 = graph.adjacency_from_edges(4, sorted(e2))
        got = conditional_layer2_log_likelihood(c, a1, a2, w, p)
        assert got == pytest.approx(_brute_conditional(c, e1, e2, w, p), abs=1e-12)


# --- real-data targets -------------------------------------------------------------------------

REAL_DIR = os.environ.get("GMMLP_INTERNET_DIR")


@acc("real-data targets")
@pytest.mark.slow
@pytest.mark.skipif(not REAL_DIR, reason="set GMMLP_INTERNET_DIR to a folder with ipv4.edges and ipv6.edges")
def test_internet_persistence(tmp_path):
    from gmmlp import io
    from gmmlp.generator import Multiplex

    d = Path(REAL_DIR)
    layers = []
    for name in ("ipv4", "ipv6"):
        g = io.parse_edge_list(d / f"{name}.edges")
        deg = graph.degrees(g.adjacency)
        params = derive_params(len(g.ids), float(deg.mean()), 2.1, 0.5)
        coords = embed_layer(g.adjacency, params, EmbeddingConfig(), np.random.default_rng(0))
        layers.append((g, coords))
    (g1, c1), (g2, c2) = layers
    m = Multiplex(g1.adjacency, g2.adjacency, c1, c2, io.align_common(g1.ids, g2.ids))
    cur = analytics.trans_layer_probability(analytics.classify_pairs(m).connected, m.common_coords1(),
                                            m.common_layer2())
    w, sigma = analytics.estimate_w(cur, float(c2.radial.max()))
    assert w == pytest.approx(0.38, abs=0.05)
    assert sigma == pytest.approx(0.08, abs=0.04)
