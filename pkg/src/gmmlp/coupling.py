"""Cross-layer coordinate coupling.

Radial coordinates are tied through a Gumbel-Hougaard copula on the
exponential radial CDFs F_i(r) = exp(-phi_i), phi_i = (R_i - r) / (2 beta_i).
Angles are shifted by a directed arc length drawn from a zero-mean
Gaussian truncated to [-N/2, N/2].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .geometry import TWO_PI, LayerParams, angular_distance

BISECTION_TOL = 1e-10


@dataclass(frozen=True)
class CorrelationParams:
    """Radial (``nu``) and angular (``g``) correlation strengths.

    ``n_nodes`` is the circle size used for the arc-length offsets; for
    layers of different sizes this is the layer-2 size.
    """

    nu: float
    g: float
    n_nodes: int
    eta_copula: float = field(init=False)
    sigma0: float = field(init=False)
    sigma: float = field(init=False)

    def __post_init__(self):
        if not 0 <= self.nu < 1:
            raise ValueError(f"nu must lie in [0, 1), got {self.nu}")
        if not 0 < self.g <= 1:
            raise ValueError(f"g must lie in (0, 1], got {self.g}")
        if self.n_nodes < 2:
            raise ValueError("n_nodes must be >= 2")
        sigma0 = min(100.0, self.n_nodes / (4 * math.pi))
        object.__setattr__(self, "eta_copula", 1.0 / (1.0 - self.nu))
        object.__setattr__(self, "sigma0", sigma0)
        object.__setattr__(self, "sigma", 0.0 if self.g == 1 else sigma0 * (1.0 / self.g - 1.0))


def _phi(r, params: LayerParams):
    return (params.disc_radius - np.asarray(r, dtype=float)) / (2.0 * params.beta)


def _log_sum_pow(phi1, phi2, eta):
    """ln(phi1^eta + phi2^eta) without overflow for large eta."""
    hi = np.maximum(phi1, phi2)
    lo = np.minimum(phi1, phi2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(hi > 0, lo / hi, 0.0)
        return eta * np.log(hi) + np.log1p(ratio ** eta)


def _check_nu(nu):
    if not 0 <= nu < 1:
        raise ValueError(f"nu must lie in [0, 1), got {nu}")


def conditional_radial_pdf(r2, r1, params1: LayerParams, params2: LayerParams, nu: float):
    """Density of r2 given r1 under the Gumbel-Hougaard coupling.

    Support is r2 <= R2 (the exponential approximation has no lower
    bound); the density is zero above R2. At ``nu == 0`` it is exactly the
    marginal (1 / 2 beta2) exp((r2 - R2) / 2 beta2).
    """
    _check_nu(nu)
    r2 = np.asarray(r2, dtype=float)
    eta = 1.0 / (1.0 - nu)
    phi1 = np.broadcast_to(_phi(r1, params1), np.broadcast(r2, np.asarray(r1)).shape)
    phi2 = np.broadcast_to(_phi(r2, params2), phi1.shape)
    scale = 1.0 / (2.0 * params2.beta)
    if nu == 0:
        out = np.where(phi2 >= 0, scale * np.exp(-np.maximum(phi2, 0.0)), 0.0)
        return out if out.ndim else float(out)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_s = _log_sum_pow(phi1, phi2, eta)
        s_root = np.exp(log_s / eta)
        log_pdf = (
            math.log(scale)
            + phi1
            - s_root
            + (eta - 1.0) * (np.log(phi1) + np.log(phi2))
            + (1.0 / eta - 2.0) * log_s
            + np.log(s_root + eta - 1.0)
        )
        out = np.where((phi2 > 0) & (phi1 > 0), np.exp(log_pdf), 0.0)
    return out if out.ndim else float(out)


def _log_conditional_cdf_phi(phi2, phi1, eta):
    """ln P(r2 <= r | r1) expressed through phi2 = phi(r), phi1 = phi(r1) > 0."""
    log_s = _log_sum_pow(phi1, phi2, eta)
    s_root = np.exp(log_s / eta)
    return phi1 - s_root + (1.0 / eta - 1.0) * log_s + (eta - 1.0) * np.log(phi1)


def conditional_radial_cdf(r2, r1, params1: LayerParams, params2: LayerParams, nu: float):
    """P(r2' <= r2 | r1): the copula derivative dC/du evaluated at u = F1(r1)."""
    _check_nu(nu)
    r2 = np.asarray(r2, dtype=float)
    phi1 = np.broadcast_to(_phi(r1, params1), np.broadcast(r2, np.asarray(r1)).shape)
    phi2 = np.broadcast_to(_phi(r2, params2), phi1.shape)
    eta = 1.0 / (1.0 - nu)
    if nu == 0:
        out = np.exp(-np.maximum(phi2, 0.0))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.exp(_log_conditional_cdf_phi(np.maximum(phi2, 0.0), phi1, eta))
        # phi1 == 0 (r1 at the rim) pins the conditional law to r2 = R2
        val = np.where(phi1 > 0, val, np.where(phi2 > 0, 0.0, 1.0))
        out = val
    out = np.where(phi2 <= 0, 1.0, out)
    return out if out.ndim else float(out)


def sample_conditional_radial(r1, params1: LayerParams, params2: LayerParams, nu: float,
                              rng: np.random.Generator) -> np.ndarray:
    """Draw r2 | r1 for every entry of ``r1``.

    Inverts the conditional CDF by bisection in phi2 to an absolute
    tolerance of 1e-10, then clamps to [0, R2].
    """
    _check_nu(nu)
    r1 = np.atleast_1d(np.asarray(r1, dtype=float))
    u = rng.random(r1.shape)
    eta = 1.0 / (1.0 - nu)
    if nu == 0:
        phi2 = -np.log(u)
    else:
        phi1 = _phi(r1, params1)
        log_u = np.log(u)
        lo = np.zeros_like(r1)
        hi = np.maximum(np.maximum(phi1, 1.0), -log_u) * 2.0
        with np.errstate(divide="ignore", invalid="ignore"):
            # the conditional CDF is decreasing in phi2; grow hi until it brackets u
            for _ in range(200):
                bad = (_log_conditional_cdf_phi(hi, phi1, eta) > log_u) & (phi1 > 0)
                if not bad.any():
                    break
                hi = np.where(bad, hi * 2.0, hi)
            while True:
                mid = 0.5 * (lo + hi)
                above = _log_conditional_cdf_phi(mid, phi1, eta) > log_u
                lo = np.where(above, mid, lo)
                hi = np.where(above, hi, mid)
                if np.max(hi - lo) <= BISECTION_TOL:
                    break
        phi2 = np.where(phi1 > 0, 0.5 * (lo + hi), 0.0)
    r2 = params2.disc_radius - 2.0 * params2.beta * phi2
    return np.clip(r2, 0.0, params2.disc_radius)


def sample_angular_offset(corr: CorrelationParams, n: int, rng: np.random.Generator, size=None):
    """Directed arc lengths l in [-n/2, n/2] from the truncated Gaussian.

    ``g == 1`` gives exactly zero. For sigma > 10 n the truncated Gaussian
    is indistinguishable from uniform and is sampled as such.
    """
    shape = () if size is None else size
    sigma = corr.sigma
    half = n / 2.0
    if sigma == 0:
        out = np.zeros(shape)
    elif sigma > 10 * n:
        out = rng.uniform(-half, half, shape)
    else:
        out = np.empty(int(np.prod(shape, dtype=np.int64)))
        filled = 0
        while filled < out.size:
            need = out.size - filled
            draw = rng.normal(0.0, sigma, need)
            ok = draw[np.abs(draw) <= half]
            out[filled:filled + ok.size] = ok
            filled += ok.size
        out = out.reshape(shape)
    return out if np.ndim(out) else float(out)


def assign_layer2_angle(theta1, l, n: int):
    """theta2 = (theta1 + 2 pi l / n) mod 2 pi."""
    out = np.mod(np.asarray(theta1) + TWO_PI * np.asarray(l) / n, TWO_PI)
    out = np.where(out >= TWO_PI, 0.0, out)
    return out if out.ndim else float(out)


def conditional_angular_cdf(dtheta, dtheta1, corr: CorrelationParams, n: int | None = None):
    """P(dtheta2 <= dtheta | dtheta1) for the folded-Gaussian angular law.

    The first branch applies for dtheta <= pi - dtheta1, the second
    otherwise. With sigma == 0 the law is a point mass at dtheta1.
    """
    n = corr.n_nodes if n is None else n
    dtheta = np.asarray(dtheta, dtype=float)
    dtheta1 = np.asarray(dtheta1, dtype=float)
    sigma = corr.sigma
    if sigma == 0:
        out = (dtheta >= dtheta1).astype(float)
        return out if out.ndim else float(out)
    a = n / (4.0 * math.pi * sigma)
    k2 = 2.0 * erf(n / (4.0 * sigma))
    first = (erf(a * (dtheta - dtheta1)) + erf(a * (dtheta + dtheta1))) / k2
    second = 1.0 - erf(a * (TWO_PI - dtheta - dtheta1)) / k2 + erf(a * (dtheta - dtheta1)) / k2
    out = np.where(dtheta <= math.pi - dtheta1, first, second)
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def conditional_angular_pdf(dtheta2, dtheta1, corr: CorrelationParams, n: int | None = None):
    """Folded-Gaussian density of dtheta2 given dtheta1 on [0, pi]."""
    n = corr.n_nodes if n is None else n
    sigma = corr.sigma
    if sigma == 0:
        raise ValueError("density is a point mass when g == 1")
    s = 2.0 * math.sqrt(2.0) * math.pi * sigma / n
    k = erf(n / (4.0 * sigma))
    d2 = np.asarray(dtheta2, dtype=float)
    d1 = np.asarray(dtheta1, dtype=float)
    folded = math.pi - np.abs(math.pi - d2 - d1)
    out = (np.exp(-(d2 - d1) ** 2 / (2 * s * s)) + np.exp(-folded ** 2 / (2 * s * s))) / (k * math.sqrt(2 * math.pi) * s)
    return out if out.ndim else float(out)


def sample_layer2_coords(r1, theta1, params1: LayerParams, params2: LayerParams,
                         corr: CorrelationParams, rng: np.random.Generator):
    """Couple layer-2 coordinates to given layer-1 coordinates (common nodes)."""
    r2 = sample_conditional_radial(r1, params1, params2, corr.nu, rng)
    l = sample_angular_offset(corr, corr.n_nodes, rng, size=np.shape(r1))
    theta2 = assign_layer2_angle(theta1, l, corr.n_nodes)
    return r2, theta2


def layer2_angular_distance(theta1a, theta1b, corr: CorrelationParams, rng: np.random.Generator):
    """Angular distance in layer 2 after independently offsetting both endpoints."""
    n = corr.n_nodes
    la = sample_angular_offset(corr, n, rng, size=np.shape(theta1a))
    lb = sample_angular_offset(corr, n, rng, size=np.shape(theta1b))
    return angular_distance(assign_layer2_angle(theta1a, la, n), assign_layer2_angle(theta1b, lb, n))
