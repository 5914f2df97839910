"""Hyperbolic-disc primitives shared by every other module.

Curvature is fixed at K = -1. Radial coordinates follow the exponential
approximation of the H2 radial density, which is also the marginal the
copula coupling is built on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LayerParams:
    """Target and derived parameters of one H2 layer.

    Parameters
    ----------
    n_nodes : int
        Number of nodes ``N``.
    mean_degree : float
        Target average degree.
    gamma : float
        Power-law exponent, must exceed 2.
    temperature : float
        Temperature in ``[0, 1)``.

    The derived fields ``beta``, ``fermi_constant`` (``c``) and
    ``disc_radius`` (``R``) are computed on construction.
    """

    n_nodes: int
    mean_degree: float
    gamma: float
    temperature: float
    beta: float = field(init=False)
    fermi_constant: float = field(init=False)
    disc_radius: float = field(init=False)

    def __post_init__(self):
        n, kbar, gamma, T = self.n_nodes, self.mean_degree, self.gamma, self.temperature
        if int(n) != n or n < 2:
            raise ValueError(f"n_nodes must be an integer >= 2, got {n}")
        if not kbar > 0:
            raise ValueError(f"mean_degree must be positive, got {kbar}")
        if not gamma > 2:
            raise ValueError(f"gamma must exceed 2, got {gamma}")
        if not 0 <= T < 1:
            raise ValueError(f"temperature must lie in [0, 1), got {T}")
        # sin(T pi) / (2T) -> pi / 2 as T -> 0
        ratio = math.pi / 2 if T == 0 else math.sin(T * math.pi) / (2 * T)
        c = kbar * ratio * ((gamma - 2) / (gamma - 1)) ** 2
        if c >= n:
            raise ValueError(f"fermi constant c={c:.6g} >= N={n}: disc radius would be nonpositive")
        object.__setattr__(self, "n_nodes", int(n))
        object.__setattr__(self, "beta", 1.0 / (gamma - 1))
        object.__setattr__(self, "fermi_constant", c)
        object.__setattr__(self, "disc_radius", 2.0 * math.log(n / c))

    @property
    def min_expected_degree(self) -> float:
        """Expected minimum degree k0 = kbar (gamma - 2) / (gamma - 1)."""
        return self.mean_degree * (self.gamma - 2) / (self.gamma - 1)

    def as_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "mean_degree": self.mean_degree,
            "gamma": self.gamma,
            "temperature": self.temperature,
            "beta": self.beta,
            "fermi_constant": self.fermi_constant,
            "disc_radius": self.disc_radius,
        }


def derive_params(n: int, mean_degree: float, gamma: float, temperature: float) -> LayerParams:
    return LayerParams(n, mean_degree, gamma, temperature)


@dataclass(frozen=True)
class NodeCoords:
    """Polar coordinates of the nodes of one layer; angles are wrapped to [0, 2pi)."""

    radial: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        r = np.ascontiguousarray(self.radial, dtype=float)
        theta = np.mod(np.asarray(self.angular, dtype=float), TWO_PI)
        # mod can round up to exactly 2pi for tiny negative inputs
        theta = np.ascontiguousarray(np.where(theta >= TWO_PI, 0.0, theta))
        if r.shape != theta.shape or r.ndim != 1:
            raise ValueError("radial and angular arrays must be 1-D and of equal length")
        object.__setattr__(self, "radial", r)
        object.__setattr__(self, "angular", theta)

    def __len__(self) -> int:
        return self.radial.shape[0]

    def subset(self, index) -> "NodeCoords":
        return NodeCoords(self.radial[index], self.angular[index])


def angular_distance(theta1, theta2):
    """Angular separation pi - |pi - |theta1 - theta2||, in [0, pi]."""
    d = np.abs(np.mod(theta1, TWO_PI) - np.mod(theta2, TWO_PI))
    return np.pi - np.abs(np.pi - d)


def hyperbolic_distance(r1, theta1, r2, theta2):
    """Exact hyperbolic distance between points on the disc.

    Uses the cancellation-free form
    cosh x = cosh(r1 - r2) + 2 sin^2(dtheta/2) sinh r1 sinh r2,
    which equals the textbook arccosh expression; the argument is clamped
    to 1 before ``arccosh``.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    half = 0.5 * angular_distance(theta1, theta2)
    arg = np.cosh(r1 - r2) + 2.0 * np.sin(half) ** 2 * np.sinh(r1) * np.sinh(r2)
    out = np.arccosh(np.maximum(arg, 1.0))
    return out if out.ndim else float(out)


def approx_hyperbolic_distance(r1, theta1, r2, theta2):
    """Large-radius approximation r1 + r2 + 2 ln sin(dtheta/2)."""
    dtheta = angular_distance(theta1, theta2)
    with np.errstate(divide="ignore"):
        out = np.asarray(r1) + np.asarray(r2) + 2.0 * np.log(np.sin(0.5 * dtheta))
    return out if np.ndim(out) else float(out)


def pairwise_distances(coords: NodeCoords, i, j):
    """Exact distances between node index arrays ``i`` and ``j``."""
    return hyperbolic_distance(coords.radial[i], coords.angular[i], coords.radial[j], coords.angular[j])


def fermi_dirac(x, radius: float, temperature: float):
    """Fermi-Dirac connection probability 1 / (1 + exp((x - R) / 2T)).

    ``temperature == 0`` is the step function: 1 for ``x <= R``, else 0.
    """
    x = np.asarray(x, dtype=float)
    if temperature == 0:
        out = (x <= radius).astype(float)
    else:
        out = expit(-(x - radius) / (2.0 * temperature))
    return out if out.ndim else float(out)


def connection_probability(x, params: LayerParams):
    return fermi_dirac(x, params.disc_radius, params.temperature)


def radial_cdf(r, params: LayerParams):
    """CDF of the exponential radial density truncated to [0, R]."""
    a = 1.0 / (2.0 * params.beta)
    R = params.disc_radius
    r = np.clip(np.asarray(r, dtype=float), 0.0, R)
    lo = math.exp(-a * R)
    out = (np.exp(a * (r - R)) - lo) / (1.0 - lo)
    return out if out.ndim else float(out)


def radial_quantile(u, params: LayerParams):
    """Inverse of :func:`radial_cdf`."""
    a = 1.0 / (2.0 * params.beta)
    R = params.disc_radius
    lo = math.exp(-a * R)
    u = np.asarray(u, dtype=float)
    out = R + np.log(lo + u * (1.0 - lo)) / a
    out = np.clip(out, 0.0, R)
    return out if out.ndim else float(out)


def radial_mean(params: LayerParams) -> float:
    """Mean of the truncated exponential radial density."""
    a = 1.0 / (2.0 * params.beta)
    R = params.disc_radius
    lo = math.exp(-a * R)
    # int_0^R r a e^{a(r-R)} dr = R - (1 - e^{-aR}) / a
    return (R - (1.0 - lo) / a) / (1.0 - lo)


def sample_radial(params: LayerParams, rng: np.random.Generator, size=None):
    """Draw radial coordinates by inverse transform of :func:`radial_cdf`."""
    return radial_quantile(rng.random(size), params)


def sample_coords(params: LayerParams, rng: np.random.Generator, size: int | None = None) -> NodeCoords:
    """Independent H2 coordinates: exponential radii, uniform angles."""
    n = params.n_nodes if size is None else size
    r = sample_radial(params, rng, n)
    theta = rng.random(n) * TWO_PI
    return NodeCoords(r, theta)


def expected_degree_at_radius(r, params: LayerParams):
    """kbar(r) = k0 exp((R - r) / 2)."""
    out = params.min_expected_degree * np.exp(0.5 * (params.disc_radius - np.asarray(r, dtype=float)))
    return out if np.ndim(out) else float(out)


def radius_from_degree(k, params: LayerParams):
    """Radius whose expected degree equals kappa = max(k0, k - gamma T), clamped to [0, R]."""
    k0 = params.min_expected_degree
    kappa = np.maximum(k0, np.asarray(k, dtype=float) - params.gamma * params.temperature)
    out = np.clip(params.disc_radius - 2.0 * np.log(kappa / k0), 0.0, params.disc_radius)
    return out if np.ndim(out) else float(out)
