"""Maximum-likelihood hyperbolic embedding of a single layer.

Radii come from observed degrees. Angles are placed greedily in
decreasing-degree order, each chosen on a uniform grid and sharpened by
a few nested zooms, then refined node by node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import optimize, special

from . import graph
from .geometry import TWO_PI, LayerParams, NodeCoords, connection_probability, pairwise_distances, radius_from_degree

PROB_FLOOR = 1e-15


@dataclass(frozen=True)
class EmbeddingConfig:
    """Angular search settings.

    ``candidate_angles`` is the size of the uniform coarse grid; each of
    the ``zoom_levels`` zooms evaluates ``zoom_angles`` points spanning
    two cells around the current optimum. ``temperature`` and ``gamma``
    override the values in the layer parameters when set.
    """

    candidate_angles: int = 360
    refinement_passes: int = 3
    temperature: float | None = None
    gamma: float | None = None
    zoom_levels: int = 2
    zoom_angles: int = 33

    def __post_init__(self):
        if self.candidate_angles < 4:
            raise ValueError("candidate_angles must be >= 4")
        if self.refinement_passes < 0:
            raise ValueError("refinement_passes must be >= 0")
        if self.zoom_levels < 0 or self.zoom_angles < 3:
            raise ValueError("zoom_levels must be >= 0 and zoom_angles >= 3")


def infer_radial_coords(degrees, params: LayerParams) -> np.ndarray:
    return np.asarray(radius_from_degree(np.asarray(degrees), params), dtype=float)


def _pair_log_terms(x, params: LayerParams):
    """(ln p, ln(1 - p)) with p floored to [eps, 1 - eps]."""
    p = np.clip(connection_probability(x, params), PROB_FLOOR, 1.0 - PROB_FLOOR)
    return np.log(p), np.log1p(-p)


def log_likelihood(coords: NodeCoords, adjacency, params: LayerParams) -> float:
    """Sum over unordered pairs of a ln p(x) + (1 - a) ln(1 - p(x))."""
    n = len(coords)
    if adjacency.shape[0] != n:
        raise ValueError("coordinates and adjacency disagree on the number of nodes")
    lookup = graph.EdgeLookup(adjacency)
    total = 0.0
    for i, j in graph.iter_all_pairs(n):
        lp, lq = _pair_log_terms(pairwise_distances(coords, i, j), params)
        a = lookup.contains(i, j)
        total += float(np.sum(np.where(a, lp, lq)))
    return total


def conditional_layer2_log_likelihood(coords2: NodeCoords, adj1, adj2, w: float, params2: LayerParams) -> float:
    """Layer-2 log-likelihood given layer 1 under link persistence ``w``.

    Sum over pairs of ln[w a1 a2 + (1 - w a1) p2^a2 (1 - p2)^(1 - a2)].
    All three arguments are aligned on common nodes. At ``w == 0`` the
    result is bitwise equal to :func:`log_likelihood` on layer 2.
    """
    if not 0 <= w <= 1:
        raise ValueError(f"w must lie in [0, 1], got {w}")
    n = len(coords2)
    if adj1.shape[0] != n or adj2.shape[0] != n:
        raise ValueError("layers must be aligned on the same common nodes")
    look1 = graph.EdgeLookup(adj1)
    look2 = graph.EdgeLookup(adj2)
    log_keep = math.log1p(-w) if w < 1 else -math.inf
    total = 0.0
    for i, j in graph.iter_all_pairs(n):
        x = pairwise_distances(coords2, i, j)
        p = np.clip(connection_probability(x, params2), PROB_FLOOR, 1.0 - PROB_FLOOR)
        a1 = look1.contains(i, j)
        a2 = look2.contains(i, j)
        with np.errstate(divide="ignore"):
            both = np.log(w + (1.0 - w) * p)
            only1 = np.log1p(-p) + log_keep
        term = np.where(a2, np.where(a1, both, np.log(p)), np.where(a1, only1, np.log1p(-p)))
        total += float(np.sum(term))
    return total


@numba.njit(cache=True)
def _candidate_scores(ri, cand_cos, cand_sin, r_other, cos_other, sin_other, is_nbr,
                      radius, temperature, log_floor, log_ceil):
    """Log-likelihood of node i at each candidate angle against the given nodes."""
    m = cand_cos.shape[0]
    scores = np.zeros(m)
    sinh_i = math.sinh(ri)
    expo = 0.5 / temperature if temperature > 0 else 0.0
    scale = math.exp(-radius)
    for k in range(r_other.shape[0]):
        rj = r_other[k]
        base = math.cosh(ri - rj)
        prod = sinh_i * math.sinh(rj)
        cj = cos_other[k]
        sj = sin_other[k]
        nbr = is_nbr[k]
        for c in range(m):
            one_minus_cos = 1.0 - (cand_cos[c] * cj + cand_sin[c] * sj)
            if one_minus_cos < 0.0:
                one_minus_cos = 0.0
            arg = base + one_minus_cos * prod
            # u = exp((x - R) / 2T) with x = arccosh(arg)
            u = (arg + math.sqrt(arg * arg - 1.0)) * scale
            if temperature > 0:
                if expo != 1.0:
                    u = u ** expo
                val = -math.log1p(u) if nbr else -math.log1p(1.0 / u)
            else:
                inside = u <= 1.0
                val = 0.0 if inside == nbr else log_floor
            if val < log_floor:
                val = log_floor
            elif val > log_ceil:
                val = log_ceil
            scores[c] += val
    return scores


class _AngleSearch:
    """Coarse uniform grid followed by nested zooms around the best grid angle."""

    def __init__(self, config: EmbeddingConfig, params: LayerParams, r: np.ndarray, theta: np.ndarray):
        self.m = config.candidate_angles
        self.zoom_levels = config.zoom_levels
        self.zoom_angles = config.zoom_angles
        self.grid = np.arange(self.m) * (TWO_PI / self.m)
        self.params = params
        self.r = r
        self.theta = theta
        self.cos = np.cos(theta)
        self.sin = np.sin(theta)
        self.lo = math.log(PROB_FLOOR)
        self.hi = math.log1p(-PROB_FLOOR)

    def set_angle(self, node, angle):
        self.theta[node] = angle
        self.cos[node] = math.cos(angle)
        self.sin[node] = math.sin(angle)

    def scores(self, node, candidates, others, nbr):
        return _candidate_scores(
            self.r[node], np.cos(candidates), np.sin(candidates), self.r[others], self.cos[others],
            self.sin[others], nbr, self.params.disc_radius, self.params.temperature, self.lo, self.hi,
        )

    def best(self, node, others, nbr):
        """Best angle for ``node`` against ``others`` and its score."""
        s = self.scores(node, self.grid, others, nbr)
        k = int(np.argmax(s))
        angle, value = self.grid[k], s[k]
        width = TWO_PI / self.m
        for _ in range(self.zoom_levels):
            cand = angle + np.linspace(-width, width, self.zoom_angles)
            s = self.scores(node, cand, others, nbr)
            k = int(np.argmax(s))
            if s[k] > value:
                angle, value = cand[k], s[k]
            width = 2.0 * width / (self.zoom_angles - 1)
        return float(np.mod(angle, TWO_PI)), float(value)


def embed_layer(adjacency, params: LayerParams, config: EmbeddingConfig | None = None,
                rng: np.random.Generator | None = None, history: list | None = None) -> NodeCoords:
    """Embed ``adjacency`` into the disc described by ``params``.

    Nodes are placed greedily in decreasing-degree order at the angle that
    maximises their log-likelihood against the nodes placed so far; each
    refinement pass then re-optimises every node against all others and
    moves it only on a strict improvement. Isolated nodes sit at r = R on
    a random angle. If ``history`` is a list, the total log-likelihood
    after the greedy stage and after each pass is appended to it.
    """
    config = config or EmbeddingConfig()
    rng = rng or np.random.default_rng()
    if config.temperature is not None or config.gamma is not None:
        params = LayerParams(
            params.n_nodes,
            params.mean_degree,
            config.gamma if config.gamma is not None else params.gamma,
            config.temperature if config.temperature is not None else params.temperature,
        )
    n = adjacency.shape[0]
    if n != params.n_nodes:
        raise ValueError(f"graph has {n} nodes but params.n_nodes = {params.n_nodes}")
    deg = graph.degrees(adjacency)
    r = infer_radial_coords(deg, params)
    theta = np.zeros(n)
    search = _AngleSearch(config, params, r, theta)
    indptr, indices = adjacency.indptr, adjacency.indices
    order = np.argsort(-deg, kind="stable")
    isolated = deg == 0
    placed = np.zeros(n, dtype=bool)
    for node in np.flatnonzero(isolated):
        search.set_angle(node, rng.random() * TWO_PI)
        placed[node] = True

    def neighbours(node, others):
        mask = np.zeros(n, dtype=np.bool_)
        mask[indices[indptr[node]:indptr[node + 1]]] = True
        return mask[others]

    for node in order[~isolated[order]]:
        others = np.flatnonzero(placed)
        if others.size == 0:
            search.set_angle(node, rng.random() * TWO_PI)
        else:
            search.set_angle(node, search.best(node, others, neighbours(node, others))[0])
        placed[node] = True

    def coords():
        return NodeCoords(r.copy(), theta.copy())

    if history is not None:
        history.append(log_likelihood(coords(), adjacency, params))
    everyone = np.arange(n)
    min_gain = 1e-9 * n
    for _ in range(config.refinement_passes):
        for node in order[~isolated[order]]:
            others = everyone[everyone != node]
            nbr = neighbours(node, others)
            angle, value = search.best(node, others, nbr)
            current = search.scores(node, np.array([theta[node]]), others, nbr)[0]
            if value > current + min_gain:
                search.set_angle(node, angle)
        if history is not None:
            history.append(log_likelihood(coords(), adjacency, params))
    return coords()


def _discrete_powerlaw_fit(tail: np.ndarray, kmin: int) -> float:
    log_sum = float(np.log(tail).sum())
    n = tail.size

    def nll(alpha):
        return n * math.log(special.zeta(alpha, kmin)) + alpha * log_sum

    res = optimize.minimize_scalar(nll, bounds=(1.01, 8.0), method="bounded", options={"xatol": 1e-6})
    return float(res.x)


def _discrete_powerlaw_ks(tail: np.ndarray, kmin: int, alpha: float) -> float:
    values, counts = np.unique(tail, return_counts=True)
    emp = np.cumsum(counts) / tail.size
    norm = special.zeta(alpha, kmin)
    # model CDF at each observed value: 1 - zeta(alpha, k + 1) / zeta(alpha, kmin)
    model = 1.0 - special.zeta(alpha, values + 1) / norm
    emp_before = np.concatenate([[0.0], emp[:-1]])
    model_before = 1.0 - special.zeta(alpha, values) / norm
    return float(max(np.max(np.abs(emp - model)), np.max(np.abs(emp_before - model_before))))


def fit_powerlaw(degrees, min_tail: int = 50) -> tuple[float, int, float]:
    """Discrete power-law MLE with k_min chosen by KS minimisation.

    Returns ``(gamma, k_min, ks_distance)``. Candidate k_min values keep
    at least ``min_tail`` observations in the tail.
    """
    k = np.asarray(degrees)
    k = k[k >= 1].astype(float)
    if k.size < 50:
        raise ValueError("need at least 50 nodes with degree >= 1")
    if np.all(k == k[0]):
        raise ValueError("degenerate degree sequence: all degrees are equal")
    best = None
    for kmin in np.unique(k):
        tail = k[k >= kmin]
        if tail.size < min_tail or np.all(tail == tail[0]):
            break
        alpha = _discrete_powerlaw_fit(tail, int(kmin))
        ks = _discrete_powerlaw_ks(tail, int(kmin), alpha)
        if best is None or ks < best[2]:
            best = (alpha, int(kmin), ks)
    if best is None:
        raise ValueError("degree sequence too short to fit a tail")
    return best


def estimate_gamma(degrees) -> float:
    return fit_powerlaw(degrees)[0]
