"""Single H2 layers, correlated two-layer multiplexes, and link persistence."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from . import graph
from .coupling import CorrelationParams, sample_layer2_coords
from .geometry import LayerParams, NodeCoords, connection_probability, hyperbolic_distance, sample_coords

log = logging.getLogger(__name__)

_ROWS_PER_TASK = 256


@dataclass(frozen=True)
class Multiplex:
    """Two layers sharing ``common_count`` nodes.

    ``node_map`` has shape ``(common_count, 2)``; row c holds the index of
    common node c in layer 1 and in layer 2. ``persistent_edges`` lists
    layer-2 index pairs selected by link persistence (``None`` if the
    persistence step has not run).
    """

    layer1: sp.csr_array
    layer2: sp.csr_array
    coords1: NodeCoords | None
    coords2: NodeCoords | None
    node_map: np.ndarray
    persistent_edges: np.ndarray | None = None

    @property
    def common_count(self) -> int:
        return int(self.node_map.shape[0])

    @property
    def n1(self) -> int:
        return self.layer1.shape[0]

    @property
    def n2(self) -> int:
        return self.layer2.shape[0]

    def common_layer1(self) -> sp.csr_array:
        return graph.induced_subgraph(self.layer1, self.node_map[:, 0])

    def common_layer2(self) -> sp.csr_array:
        return graph.induced_subgraph(self.layer2, self.node_map[:, 1])

    def common_coords1(self) -> NodeCoords:
        return self.coords1.subset(self.node_map[:, 0])

    def common_coords2(self) -> NodeCoords:
        return self.coords2.subset(self.node_map[:, 1])


def _row_key(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63, dtype=np.int64))


def _row_generator(key: int, row: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=key, spawn_key=(row,))))


def _connect_rows(params: LayerParams, coords: NodeCoords, key: int, start: int, stop: int):
    r, theta = coords.radial, coords.angular
    n = r.shape[0]
    out = []
    for i in range(start, stop):
        if i == n - 1:
            break
        x = hyperbolic_distance(r[i], theta[i], r[i + 1:], theta[i + 1:])
        p = connection_probability(x, params)
        if params.temperature == 0:
            hit = p > 0.5
        else:
            hit = _row_generator(key, i).random(x.shape[0]) < p
        js = np.flatnonzero(hit) + i + 1
        if js.size:
            out.append(np.column_stack([np.full(js.size, i, dtype=np.int64), js]))
    return out


def generate_layer(params: LayerParams, coords: NodeCoords, rng: np.random.Generator, threads: int = 1) -> sp.csr_array:
    """Connect every pair independently with its Fermi-Dirac probability.

    Pair (i, j), i < j, consumes the (j - i - 1)-th uniform of a stream
    keyed by (key, i), where ``key`` is one draw from ``rng``. The graph is
    therefore identical for any ``threads``.
    """
    n = len(coords)
    if n != params.n_nodes:
        raise ValueError(f"coords hold {n} nodes but params.n_nodes = {params.n_nodes}")
    key = _row_key(rng)
    tasks = [(s, min(s + _ROWS_PER_TASK, n)) for s in range(0, n, _ROWS_PER_TASK)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            chunks = list(pool.map(lambda t: _connect_rows(params, coords, key, *t), tasks))
    else:
        chunks = [_connect_rows(params, coords, key, *t) for t in tasks]
    parts = [e for chunk in chunks for e in chunk]
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return graph.adjacency_from_edges(n, edges)


def generate_h2(params: LayerParams, rng: np.random.Generator, threads: int = 1):
    """Coordinates and graph of a single H2 layer."""
    coords = sample_coords(params, rng)
    return coords, generate_layer(params, coords, rng, threads)


def gmm_coordinates(params1: LayerParams, params2: LayerParams, corr: CorrelationParams,
                    common: int, rng: np.random.Generator):
    """Layer-1 coordinates, and layer-2 coordinates coupled on the first ``common`` nodes."""
    n1, n2 = params1.n_nodes, params2.n_nodes
    if not 0 <= common <= min(n1, n2):
        raise ValueError(f"common={common} must lie in [0, min(N1, N2)={min(n1, n2)}]")
    coords1 = sample_coords(params1, rng)
    r2c, t2c = sample_layer2_coords(coords1.radial[:common], coords1.angular[:common], params1, params2, corr, rng)
    extra = sample_coords(params2, rng, n2 - common)
    coords2 = NodeCoords(np.concatenate([r2c, extra.radial]), np.concatenate([t2c, extra.angular]))
    return coords1, coords2


def generate_gmm(params1: LayerParams, params2: LayerParams, corr: CorrelationParams, common: int,
                 rng: np.random.Generator, threads: int = 1) -> Multiplex:
    """Two-layer geometric multiplex.

    Common nodes are indices ``0 .. common-1`` in both layers. Nodes that
    exist only in layer 2 get independent marginal coordinates.
    """
    coords1, coords2 = gmm_coordinates(params1, params2, corr, common, rng)
    layer1 = generate_layer(params1, coords1, rng, threads)
    layer2 = generate_layer(params2, coords2, rng, threads)
    idx = np.arange(common, dtype=np.int64)
    return Multiplex(layer1, layer2, coords1, coords2, np.column_stack([idx, idx]))


def common_layer1_edges(m: Multiplex) -> np.ndarray:
    """Layer-1 edges between common nodes, as common-node index pairs in lexicographic order."""
    return graph.edge_array(m.common_layer1())


def apply_link_persistence(m: Multiplex, w: float, rng: np.random.Generator) -> Multiplex:
    """Copy each common layer-1 edge into layer 2 independently with probability ``w``.

    One uniform is drawn per common layer-1 edge in lexicographic order and
    the edge is selected when it falls below ``w``; with a shared ``rng``
    state the selected sets are nested in ``w``. Every selected pair is
    recorded in ``persistent_edges`` even if layer 2 already had it.
    """
    if not 0 <= w <= 1:
        raise ValueError(f"w must lie in [0, 1], got {w}")
    edges = common_layer1_edges(m)
    u = rng.random(edges.shape[0])
    chosen = edges[u < w]
    mapped = np.sort(m.node_map[:, 1][chosen], axis=1)
    old = graph.edge_array(m.layer2)
    layer2 = graph.adjacency_from_edges(m.n2, np.concatenate([old, mapped]))
    order = np.lexsort((mapped[:, 1], mapped[:, 0])) if mapped.size else slice(None)
    log.debug("link persistence selected %d of %d common layer-1 edges", chosen.shape[0], edges.shape[0])
    return replace(m, layer2=layer2, persistent_edges=mapped[order])


def generate_gmm_lp(params1: LayerParams, params2: LayerParams, corr: CorrelationParams, common: int, w: float,
                    rng: np.random.Generator, threads: int = 1) -> Multiplex:
    m = generate_gmm(params1, params2, corr, common, rng, threads)
    return apply_link_persistence(m, w, rng)


def calibrate_mean_degree(target: float, mean_degree1: float, w: float, n: int) -> float:
    """Layer-2 target degree that makes the persisted layer reach ``target`` on average.

    Uses the uncorrelated point value kbar2 + w kbar1 (1 - kbar2 / N); with
    distance correlations the realised degree ends up somewhat lower,
    never below the returned value.
    """
    if not 0 <= w <= 1:
        raise ValueError(f"w must lie in [0, 1], got {w}")
    k2 = (target - w * mean_degree1) / (1.0 - w * mean_degree1 / n)
    if k2 <= 0:
        raise ValueError("persistence alone already exceeds the target degree")
    return k2
