"""Reference predictions for GMM-LP layers.

Closed forms hold in the uncorrelated and the maximally correlated
regimes. The conditional distribution of a layer-2 distance given the
layer-1 coordinates of a pair is computed by adaptive two-dimensional
cubature over the coupled radial coordinates, split into the regions
where the angular CDF takes its first branch, its second branch, or is
identically one.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy.special import erf

from .coupling import (
    CorrelationParams,
    assign_layer2_angle,
    conditional_radial_cdf,
    conditional_radial_pdf,
    sample_angular_offset,
    sample_conditional_radial,
)
from .geometry import (
    LayerParams,
    connection_probability,
    expected_degree_at_radius,
    hyperbolic_distance,
    radial_cdf,
    radial_quantile,
    sample_coords,
)

log = logging.getLogger(__name__)

UNCORRELATED = "uncorrelated"
MAX_CORRELATED = "max_correlated"
_REGIME_ALIASES = {"uncorrelated": UNCORRELATED, "max": MAX_CORRELATED, "max_correlated": MAX_CORRELATED}

# points per region of the 2-D Gauss-Kronrod product rule
_GK21_POINTS_2D = 21 * 21


def parse_regime(regime: str) -> str:
    try:
        return _REGIME_ALIASES[regime]
    except KeyError:
        raise ValueError(f"unknown regime {regime!r}; expected 'uncorrelated' or 'max'") from None


@dataclass(frozen=True)
class TheoryContext:
    """Parameters shared by every prediction.

    ``mean_degree1`` overrides the layer-1 average degree used in the
    uncorrelated regime (for instance by a realised value); by default
    the target of ``params1`` is used.
    """

    params1: LayerParams
    params2: LayerParams
    corr: CorrelationParams
    w: float
    quad_rel_tol: float = 1e-6
    quad_abs_tol: float = 1e-12
    quad_max_evals: int = 4_000_000
    mean_degree1: float | None = None

    def __post_init__(self):
        if not 0 <= self.w <= 1:
            raise ValueError(f"w must lie in [0, 1], got {self.w}")
        if not (self.quad_rel_tol > 0 and self.quad_abs_tol > 0 and self.quad_max_evals > 0):
            raise ValueError("quadrature tolerances and budget must be positive")

    @property
    def kbar1(self) -> float:
        return self.params1.mean_degree if self.mean_degree1 is None else self.mean_degree1

    @property
    def n_nodes(self) -> int:
        return self.params2.n_nodes


def _scalar(out):
    return out if np.ndim(out) else float(out)


# --- closed forms -------------------------------------------------------------------------------

def eta_limits(ctx: TheoryContext, x2, regime: str):
    """Probability that a pair at layer-2 distance ``x2`` is linked in layer 1."""
    regime = parse_regime(regime)
    x2 = np.asarray(x2, dtype=float)
    if regime == UNCORRELATED:
        return _scalar(np.full(x2.shape, ctx.kbar1 / ctx.n_nodes))
    return _scalar(np.asarray(connection_probability(x2, ctx.params1)))


def p2_all_prediction(ctx: TheoryContext, x2, regime: str):
    """p2(x2) + (1 - p2(x2)) w eta(x2)."""
    p2 = np.asarray(connection_probability(x2, ctx.params2))
    return _scalar(p2 + (1.0 - p2) * ctx.w * np.asarray(eta_limits(ctx, x2, regime)))


def trans_layer_limits(ctx: TheoryContext, x1, pair_set: str, regime: str):
    """Trans-layer connection probability of connected or disconnected layer-1 pairs."""
    regime = parse_regime(regime)
    if pair_set not in ("connected", "disconnected"):
        raise ValueError(f"pair_set must be 'connected' or 'disconnected', got {pair_set!r}")
    x1 = np.asarray(x1, dtype=float)
    if regime == UNCORRELATED:
        base = np.full(x1.shape, ctx.params2.mean_degree / ctx.n_nodes)
    else:
        base = np.asarray(connection_probability(x1, ctx.params2))
    if pair_set == "connected":
        return _scalar(ctx.w + (1.0 - ctx.w) * base)
    return _scalar(base)


def temperature_ratio(t1: float, t2: float) -> float:
    """C = T1 sin(T2 pi) / (T2 sin(T1 pi)), with the T -> 0 limit sin(T pi)/T -> pi."""
    def s(t):
        return math.pi if t == 0 else math.sin(t * math.pi) / t
    return s(t2) / s(t1)


def kbar2_tilde_constants(t1: float, t2: float, w: float) -> tuple[float, float, float]:
    """(A, B, C) of the maximally correlated degree bounds."""
    c = temperature_ratio(t1, t2)
    b = 1.0 + w * c
    a = b - w * math.sqrt(c * (1.0 - t1) * (1.0 - t2))
    return a, b, c


def kbar2_tilde_prediction(ctx: TheoryContext, r, regime: str):
    """Expected layer-2 degree of a node at radius ``r``.

    Uncorrelated: a point value. Maximally correlated: ``(lower, upper)``,
    which coincide at (1 + w T) kbar2(r) when the temperatures are equal.
    """
    regime = parse_regime(regime)
    k2r = np.asarray(expected_degree_at_radius(r, ctx.params2))
    w, n = ctx.w, ctx.n_nodes
    if regime == UNCORRELATED:
        return _scalar((1.0 - w * ctx.kbar1 / n) * k2r + w * ctx.kbar1)
    t1, t2 = ctx.params1.temperature, ctx.params2.temperature
    if t1 == t2:
        point = _scalar((1.0 + w * t2) * k2r)
        return point, point
    a, b, _ = kbar2_tilde_constants(t1, t2, w)
    return _scalar(a * k2r), _scalar(b * k2r)


def average_degree_bounds(ctx: TheoryContext, mean_degree2: float | None = None) -> tuple[float, float]:
    """(kbar2, kbar2 + w kbar1): range of the layer-2 average degree after persistence."""
    k2 = ctx.params2.mean_degree if mean_degree2 is None else mean_degree2
    return k2, k2 + ctx.w * ctx.kbar1


def average_degree_uncorrelated(ctx: TheoryContext, mean_degree2: float | None = None) -> float:
    k2 = ctx.params2.mean_degree if mean_degree2 is None else mean_degree2
    return k2 + ctx.w * ctx.kbar1 * (1.0 - k2 / ctx.n_nodes)


# --- angular-integral identities ----------------------------------------------------------------

def approx_connection_probability(r, rp, dtheta, radius: float, temperature: float):
    """Fermi-Dirac probability with the large-radius distance r + r' + 2 ln sin(dtheta / 2)."""
    chi = 0.5 * np.asarray(dtheta, dtype=float) * np.exp(0.5 * (r + rp - radius))
    if temperature == 0:
        return np.where(chi <= 1.0, 1.0, 0.0)
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + chi ** (1.0 / temperature))


def _angular_quad(f, scale):
    # the kernel drops from ~1 to ~0 around dtheta = 2 exp(-(s - R) / 2)
    pts = [p for p in (scale, 2 * scale, 4 * scale) if p < math.pi]
    val, _ = integrate.quad(f, 0.0, math.pi, points=pts or None, limit=500, epsabs=1e-14, epsrel=1e-11)
    return val


def angular_average(r, rp, radius: float, temperature: float, power: int = 1) -> float:
    """(1/pi) times the integral over [0, pi] of p(r, r', dtheta)^power."""
    scale = 2.0 * math.exp(-0.5 * (r + rp - radius))
    return _angular_quad(lambda d: approx_connection_probability(r, rp, d, radius, temperature) ** power,
                         scale) / math.pi


def angular_average_mixed(r, rp, radius: float, t1: float, t2: float) -> float:
    """(1/pi) times the integral over [0, pi] of p1 p2 on a shared disc radius."""
    scale = 2.0 * math.exp(-0.5 * (r + rp - radius))
    return _angular_quad(lambda d: approx_connection_probability(r, rp, d, radius, t1)
                         * approx_connection_probability(r, rp, d, radius, t2), scale) / math.pi


def angular_average_limit(r, rp, radius: float, temperature: float, power: int = 1) -> float:
    """Asymptotic value (2T / sin T pi) e^{-(r + r' - R)/2}, times (1 - T) for power 2."""
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    t = temperature
    base = 2.0 / math.pi if t == 0 else 2.0 * t / math.sin(t * math.pi)
    if power == 2:
        base *= 1.0 - t
    return base * math.exp(-0.5 * (r + rp - radius))


def mixed_kernel_degree(r, params2: LayerParams, t1: float) -> float:
    """(N / pi) int rho2(r') dr' int p1 p2 d(dtheta), with layer 1 on the layer-2 disc."""
    R = params2.disc_radius
    a = 1.0 / (2.0 * params2.beta)
    norm = 1.0 - math.exp(-a * R)

    def inner(rp):
        rho = a * math.exp(a * (rp - R)) / norm
        return rho * angular_average_mixed(r, rp, R, t1, params2.temperature)

    val, _ = integrate.quad(inner, 0.0, R, limit=200, epsrel=1e-9)
    return params2.n_nodes * val


# --- conditional distance distribution ----------------------------------------------------------

def angular_cdf_first(dtheta, dtheta1, sigma: float, n: int):
    """First branch of P(dtheta2 <= dtheta | dtheta1), valid for dtheta <= pi - dtheta1."""
    a = n / (4.0 * math.pi * sigma)
    k2 = 2.0 * erf(n / (4.0 * sigma))
    return (erf(a * (dtheta - dtheta1)) + erf(a * (dtheta + dtheta1))) / k2


def angular_cdf_second(dtheta, dtheta1, sigma: float, n: int):
    """Second branch, valid for dtheta >= pi - dtheta1."""
    a = n / (4.0 * math.pi * sigma)
    k2 = 2.0 * erf(n / (4.0 * sigma))
    return 1.0 - erf(a * (2.0 * math.pi - dtheta - dtheta1)) / k2 + erf(a * (dtheta - dtheta1)) / k2


def x2_tilde(x2: float, dtheta1: float, radius2: float) -> float:
    """min(x2 - 2 ln sin((pi - dtheta1) / 2), 2 R2)."""
    s = math.sin(0.5 * (math.pi - dtheta1))
    if s <= 0:
        return 2.0 * radius2
    return min(x2 - 2.0 * math.log(s), 2.0 * radius2)


# A region term is (kind, a, b, lo, hi): r2 runs over [a, b] and, for each r2,
# r2' over [max(0, lo(r2)), min(R2, hi(r2))] where lo/hi are (const, slope) pairs
# meaning const + slope * r2. kind is 1 or 2 (angular branch) or 0 (integrand 1).

def select_branch(x2: float, dtheta1: float, radius2: float) -> str:
    """'I1' if x~2 <= R2, 'I2' if x2 <= R2 <= x~2, else 'I3'."""
    if x2_tilde(x2, dtheta1, radius2) <= radius2:
        return "I1"
    return "I2" if x2 <= radius2 else "I3"


def region_terms(branch: str, x2: float, dtheta1: float, radius2: float):
    """Region terms of the named conditional-CDF expression at ``x2``."""
    R = radius2
    xt = x2_tilde(x2, dtheta1, R)
    if branch == "I1":
        return [
            (1, 0.0, xt, (xt, -1.0), (R, 0.0)),
            (1, xt, R, (0.0, 0.0), (R, 0.0)),
            (2, 0.0, x2, (x2, -1.0), (xt, -1.0)),
            (2, x2, xt, (0.0, 0.0), (xt, -1.0)),
            (0, 0.0, x2, (0.0, 0.0), (x2, -1.0)),
        ]
    if branch == "I2":
        return [
            (1, xt - R, R, (xt, -1.0), (R, 0.0)),
            (2, 0.0, x2, (x2, -1.0), (R, -1.0)),
            (2, x2, R, (0.0, 0.0), (R, -1.0)),
            (2, 0.0, xt - R, (R, -1.0), (R, 0.0)),
            (2, xt - R, R, (R, -1.0), (xt, -1.0)),
            (0, 0.0, x2, (0.0, 0.0), (x2, -1.0)),
        ]
    if branch == "I3":
        return [
            (1, xt - R, R, (xt, -1.0), (R, 0.0)),
            (2, x2 - R, xt - R, (x2, -1.0), (R, 0.0)),
            (2, xt - R, R, (x2, -1.0), (xt, -1.0)),
            (0, 0.0, x2 - R, (0.0, 0.0), (R, 0.0)),
            (0, x2 - R, R, (0.0, 0.0), (x2, -1.0)),
        ]
    raise ValueError(f"unknown branch {branch!r}")


class QuadratureError(RuntimeError):
    """Cubature did not reach the requested tolerance within its budget."""

    def __init__(self, message, estimate, error):
        super().__init__(f"{message}: estimate {estimate!r}, error estimate {error!r}")
        self.estimate = estimate
        self.error = error


# quantile levels at which a narrow conditional radial law is split
_BAND_LEVELS = (1e-4, 0.5, 1.0 - 1e-4)


@lru_cache(maxsize=4096)
def _radial_bands(ctx: TheoryContext, r1: float) -> tuple:
    """Sub-intervals of [0, R2] that isolate the bulk of r2 | r1 when it is narrow.

    Cubature nodes can step over a sharply peaked density and report
    convergence on a wrong value; splitting at conditional quantiles puts
    the peak inside its own sub-interval. Wide laws are left whole.
    """
    p1, p2, nu = ctx.params1, ctx.params2, ctx.corr.nu
    R = p2.disc_radius

    def quantile(q):
        f = lambda r: conditional_radial_cdf(r, r1, p1, p2, nu) - q
        if f(0.0) >= 0:
            return 0.0
        if f(R) <= 0:
            return R
        return optimize.brentq(f, 0.0, R, xtol=1e-12)

    qs = [quantile(q) for q in _BAND_LEVELS]
    if qs[-1] - qs[0] >= 0.05 * R:
        return ((0.0, R),)
    edges = sorted({0.0, R, *qs})
    return tuple((lo, hi) for lo, hi in zip(edges, edges[1:]) if hi > lo)


def _integrate_terms(terms, x2, r1, r1p, dtheta1, ctx: TheoryContext):
    p1, p2, nu = ctx.params1, ctx.params2, ctx.corr.nu
    sigma, n = ctx.corr.sigma, ctx.corr.n_nodes
    outer = _radial_bands(ctx, float(r1))
    inner = _radial_bands(ctx, float(r1p))
    live = []
    for kind_, a_, b_, lo_, hi_ in terms:
        for olo, ohi in outer:
            a2, b2 = max(a_, olo), min(b_, ohi)
            if b2 <= a2:
                continue
            for ilo, ihi in inner:
                live.append((kind_, a2, b2, lo_, hi_, ilo, ihi))
    if not live:
        return 0.0, 0.0
    a = np.array([t[1] for t in live])
    b = np.array([t[2] for t in live])
    lo_c = np.array([t[3][0] for t in live])
    lo_s = np.array([t[3][1] for t in live])
    hi_c = np.array([t[4][0] for t in live])
    hi_s = np.array([t[4][1] for t in live])
    clip_lo = np.array([t[5] for t in live])
    clip_hi = np.array([t[6] for t in live])
    kind = np.array([t[0] for t in live])

    def f(uv):
        u = uv[:, 0:1]
        v = uv[:, 1:2]
        r2 = a + (b - a) * u
        lo = np.clip(lo_c + lo_s * r2, clip_lo, clip_hi)
        hi = np.clip(hi_c + hi_s * r2, clip_lo, clip_hi)
        width = np.maximum(hi - lo, 0.0)
        r2p = lo + width * v
        dens = (conditional_radial_pdf(r2, r1, p1, p2, nu) * conditional_radial_pdf(r2p, r1p, p1, p2, nu))
        with np.errstate(over="ignore", invalid="ignore"):
            z = np.exp(np.minimum(0.5 * (x2 - r2 - r2p), 0.0))
            dt = 2.0 * np.arcsin(np.minimum(z, 1.0))
        if sigma == 0:
            g = (dt >= dtheta1).astype(float)
            g = np.where(kind == 0, 1.0, g)
        else:
            g = np.where(kind == 1, angular_cdf_first(dt, dtheta1, sigma, n),
                         np.where(kind == 2, angular_cdf_second(dt, dtheta1, sigma, n), 1.0))
        return np.clip(g, 0.0, 1.0) * dens * (b - a) * width

    rtol, atol = ctx.quad_rel_tol, ctx.quad_abs_tol
    budget = max(1, ctx.quad_max_evals // _GK21_POINTS_2D)
    # The tolerance applies to the sum over regions. A coarse pilot sizes each
    # region's absolute share so negligible pieces do not drain the budget.
    pilot = integrate.cubature(f, [0.0, 0.0], [1.0, 1.0], rule="gk21", rtol=1e-3, atol=atol,
                               max_subdivisions=min(budget, 20))
    share = max(atol, 0.5 * rtol * abs(float(np.sum(pilot.estimate))) / a.size)
    res = integrate.cubature(f, [0.0, 0.0], [1.0, 1.0], rule="gk21", rtol=0.5 * rtol, atol=share,
                             max_subdivisions=budget)
    total = float(np.sum(res.estimate))
    error = float(np.sum(res.error))
    if res.status != "converged" and error > atol + rtol * abs(total):
        raise QuadratureError("conditional distance CDF did not converge", total, error)
    return total, error


@lru_cache(maxsize=65536)
def _cdf_cached(ctx: TheoryContext, x2: float, r1: float, r1p: float, dtheta1: float) -> float:
    R = ctx.params2.disc_radius
    if x2 <= 0:
        return 0.0
    if x2 >= 2 * R:
        return 1.0
    terms = region_terms(select_branch(x2, dtheta1, R), x2, dtheta1, R)
    val, _ = _integrate_terms(terms, x2, r1, r1p, dtheta1, ctx)
    return min(max(val, 0.0), 1.0)


def _check_pair(r1, r1p, dtheta1, ctx):
    if not 0 <= dtheta1 <= math.pi:
        raise ValueError(f"dtheta1 must lie in [0, pi], got {dtheta1}")
    R1 = ctx.params1.disc_radius
    for r in (r1, r1p):
        if not 0 <= r <= R1:
            raise ValueError(f"layer-1 radius {r} outside [0, {R1}]")


def conditional_hyperbolic_cdf(x2, r1: float, r1p: float, dtheta1: float, ctx: TheoryContext):
    """P(X2 <= x2 | r1, r1', dtheta1) by region-wise adaptive cubature; clamped to [0, 1]."""
    _check_pair(r1, r1p, dtheta1, ctx)
    x = np.asarray(x2, dtype=float)
    out = np.array([_cdf_cached(ctx, float(v), float(r1), float(r1p), float(dtheta1)) for v in x.ravel()])
    return _scalar(out.reshape(x.shape))


def conditional_hyperbolic_branch(x2: float, r1: float, r1p: float, dtheta1: float, ctx: TheoryContext,
                                  branch: str) -> float:
    """Evaluate one named expression ('I1', 'I2' or 'I3') outside its own validity range if asked."""
    _check_pair(r1, r1p, dtheta1, ctx)
    terms = region_terms(branch, x2, dtheta1, ctx.params2.disc_radius)
    return _integrate_terms(terms, x2, r1, r1p, dtheta1, ctx)[0]


def conditional_hyperbolic_pdf(x2, r1: float, r1p: float, dtheta1: float, ctx: TheoryContext, h: float = 1e-3):
    """Central finite difference of :func:`conditional_hyperbolic_cdf` with step ``h``.

    Negative values down to -1e-6 are quadrature noise and clamped to 0;
    anything more negative is clamped as well but logged.
    """
    x = np.asarray(x2, dtype=float)
    up = np.asarray(conditional_hyperbolic_cdf(x + h, r1, r1p, dtheta1, ctx))
    down = np.asarray(conditional_hyperbolic_cdf(x - h, r1, r1p, dtheta1, ctx))
    pdf = (up - down) / (2.0 * h)
    if np.any(pdf < -1e-6):
        log.warning("finite-difference density below -1e-6 (min %.3g); clamped to 0", float(pdf.min()))
    return _scalar(np.maximum(pdf, 0.0))


# --- Monte-Carlo estimators ---------------------------------------------------------------------

def _layer2_distance(r1, r1p, theta1, theta1p, ctx: TheoryContext, rng):
    p1, p2, corr = ctx.params1, ctx.params2, ctx.corr
    r2 = sample_conditional_radial(r1, p1, p2, corr.nu, rng)
    r2p = sample_conditional_radial(r1p, p1, p2, corr.nu, rng)
    n = corr.n_nodes
    t2 = assign_layer2_angle(theta1, sample_angular_offset(corr, n, rng, size=np.shape(r1)), n)
    t2p = assign_layer2_angle(theta1p, sample_angular_offset(corr, n, rng, size=np.shape(r1)), n)
    return hyperbolic_distance(r2, t2, r2p, t2p)


def _radial_in_band(params: LayerParams, centre: float, half: float, size: int, rng):
    lo = radial_cdf(max(centre - half, 0.0), params)
    hi = radial_cdf(min(centre + half, params.disc_radius), params)
    return radial_quantile(lo + (hi - lo) * rng.random(size), params)


def empirical_conditional_x2(r1: float, r1p: float, dtheta1: float, ctx: TheoryContext, samples: int,
                             rng: np.random.Generator, r_band: float = 0.5, angle_band: float = 0.05) -> np.ndarray:
    """Layer-2 distances of pairs whose layer-1 coordinates fall in the given bands.

    Radii are drawn from the layer-1 radial density restricted to
    ``r +- r_band`` and the angular distance uniformly from
    ``dtheta1 +- angle_band`` (clipped to [0, pi]), which is the law of
    the pairs a generated layer would contribute to those bands.
    """
    a = _radial_in_band(ctx.params1, r1, r_band, samples, rng)
    b = _radial_in_band(ctx.params1, r1p, r_band, samples, rng)
    lo, hi = max(dtheta1 - angle_band, 0.0), min(dtheta1 + angle_band, math.pi)
    d = lo + (hi - lo) * rng.random(samples)
    theta = rng.random(samples) * 2.0 * math.pi
    return _layer2_distance(a, b, theta, theta + d, ctx, rng)


def monte_carlo_conditional_x2(x1: float, ctx: TheoryContext, samples: int, rng: np.random.Generator,
                               band: float = 0.25, batch: int = 200_000, max_batches: int = 500) -> np.ndarray:
    """Layer-2 distances of coupled pairs whose layer-1 distance lies in ``x1 +- band``.

    Layer-1 pairs are drawn from the marginals and kept by rejection.
    Raises ``RuntimeError`` if fewer than ``samples`` pairs are accepted
    within ``max_batches`` batches.
    """
    if samples < 1000:
        raise ValueError("samples must be at least 1000")
    p1 = ctx.params1
    kept = []
    total = 0
    for _ in range(max_batches):
        a = sample_coords(p1, rng, batch)
        b = sample_coords(p1, rng, batch)
        x = hyperbolic_distance(a.radial, a.angular, b.radial, b.angular)
        ok = np.abs(x - x1) <= band
        if ok.any():
            kept.append(_layer2_distance(a.radial[ok], b.radial[ok], a.angular[ok], b.angular[ok], ctx, rng))
            total += int(ok.sum())
        if total >= samples:
            return np.concatenate(kept)[:samples]
    raise RuntimeError(f"rejection starvation: accepted {total} of {samples} pairs at x1={x1:g} +- {band:g}")


def conditional_mean_x2(x1_grid, ctx: TheoryContext, samples: int, rng: np.random.Generator, band: float = 0.25):
    """Monte-Carlo E[x2 | x1] and its standard error on a grid of layer-1 distances."""
    means, ses = [], []
    for x1 in np.atleast_1d(x1_grid):
        x2 = monte_carlo_conditional_x2(float(x1), ctx, samples, rng, band)
        means.append(x2.mean())
        ses.append(x2.std(ddof=1) / math.sqrt(x2.size))
    return np.array(means), np.array(ses)
