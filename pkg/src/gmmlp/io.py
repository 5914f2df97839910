"""Edge-list, coordinate, node-map and configuration files.

Node identifiers are arbitrary whitespace-free strings; internally nodes
are dense indices in order of first appearance (or of a supplied id
list).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import graph
from .coupling import CorrelationParams
from .geometry import LayerParams, NodeCoords

log = logging.getLogger(__name__)


@dataclass
class ParsedGraph:
    """Adjacency plus the id of each dense index and what the parser dropped."""

    adjacency: object
    ids: list
    self_loops: int = 0
    duplicates: int = 0

    @property
    def warnings(self) -> int:
        return self.self_loops + self.duplicates

    def index(self) -> dict:
        return {node: k for k, node in enumerate(self.ids)}


def _data_lines(path):
    with open(path) as fh:
        for number, line in enumerate(fh, start=1):
            text = line.strip()
            if text and not text.startswith("#"):
                yield number, text.split()


def parse_edge_list(path, ids=None) -> ParsedGraph:
    """Read an undirected edge list, one ``u v`` pair per line.

    Lines starting with ``#`` and blank lines are skipped. Self-loops and
    repeated edges are dropped and counted. With ``ids`` given, nodes are
    indexed in that order (and unknown ids are appended).
    """
    order = list(ids) if ids is not None else []
    index = {node: k for k, node in enumerate(order)}
    edges = []
    for number, tokens in _data_lines(path):
        if len(tokens) != 2:
            raise ValueError(f"{path}:{number}: expected two node ids, got {len(tokens)} fields")
        pair = []
        for tok in tokens:
            if tok not in index:
                index[tok] = len(order)
                order.append(tok)
            pair.append(index[tok])
        edges.append(pair)
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    loops = int(np.count_nonzero(e[:, 0] == e[:, 1]))
    e = np.sort(e[e[:, 0] != e[:, 1]], axis=1)
    unique = np.unique(e, axis=0) if e.size else e
    dups = int(e.shape[0] - unique.shape[0])
    if loops or dups:
        log.warning("%s: dropped %d self-loop(s) and %d duplicate edge(s)", path, loops, dups)
    return ParsedGraph(graph.adjacency_from_edges(len(order), unique), order, loops, dups)


def write_edge_list(path, adjacency, ids=None) -> None:
    e = graph.edge_array(adjacency)
    names = ids if ids is not None else [str(k) for k in range(adjacency.shape[0])]
    with open(path, "w") as fh:
        for i, j in e:
            fh.write(f"{names[i]} {names[j]}\n")


def write_pairs(path, pairs, ids=None) -> None:
    with open(path, "w") as fh:
        for i, j in np.asarray(pairs, dtype=np.int64).reshape(-1, 2):
            fh.write(f"{ids[i] if ids else i} {ids[j] if ids else j}\n")


def write_coords(path, coords: NodeCoords, ids=None) -> None:
    """Write ``id r theta`` lines at 17 significant digits."""
    names = ids if ids is not None else [str(k) for k in range(len(coords))]
    with open(path, "w") as fh:
        for name, r, t in zip(names, coords.radial, coords.angular):
            fh.write(f"{name} {r:.17g} {t:.17g}\n")


def read_coords(path, ids=None) -> tuple[NodeCoords, list]:
    """Read ``id r theta`` lines; angles are wrapped to [0, 2 pi).

    With ``ids`` given the result follows that order, and any id missing
    from the file, or present in the file but not in ``ids``, is an error.
    """
    names, r, t = [], [], []
    for number, tokens in _data_lines(path):
        if len(tokens) != 3:
            raise ValueError(f"{path}:{number}: expected 'id r theta', got {len(tokens)} fields")
        try:
            r.append(float(tokens[1]))
            t.append(float(tokens[2]))
        except ValueError:
            raise ValueError(f"{path}:{number}: non-numeric coordinate") from None
        names.append(tokens[0])
    if len(set(names)) != len(names):
        raise ValueError(f"{path}: repeated node id")
    coords = NodeCoords(np.array(r), np.array(t))
    if ids is None:
        return coords, names
    pos = {name: k for k, name in enumerate(names)}
    missing = [node for node in ids if node not in pos]
    if missing:
        raise ValueError(f"{path}: no coordinates for node id {missing[0]!r}")
    extra = set(names) - set(ids)
    if extra:
        raise ValueError(f"{path}: node id {sorted(extra)[0]!r} is not in the graph")
    take = np.array([pos[node] for node in ids], dtype=np.int64)
    return coords.subset(take), list(ids)


def read_node_map(path) -> list[tuple[str, str]]:
    """Pairs ``id_in_layer1 id_in_layer2`` of common nodes."""
    out = []
    for number, tokens in _data_lines(path):
        if len(tokens) != 2:
            raise ValueError(f"{path}:{number}: expected two node ids, got {len(tokens)} fields")
        out.append((tokens[0], tokens[1]))
    return out


def align_common(ids1, ids2, pairs=None) -> np.ndarray:
    """Index pairs (layer-1 index, layer-2 index) of the common nodes.

    Without an explicit node map, nodes sharing an id are common. Rows
    are sorted by layer-1 index.
    """
    pos1 = {node: k for k, node in enumerate(ids1)}
    pos2 = {node: k for k, node in enumerate(ids2)}
    if pairs is None:
        pairs = [(node, node) for node in ids1 if node in pos2]
    rows = []
    for a, b in pairs:
        if a not in pos1:
            raise ValueError(f"node map names unknown layer-1 id {a!r}")
        if b not in pos2:
            raise ValueError(f"node map names unknown layer-2 id {b!r}")
        rows.append((pos1[a], pos2[b]))
    m = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
    if np.unique(m[:, 0]).size != m.shape[0] or np.unique(m[:, 1]).size != m.shape[0]:
        raise ValueError("node map is not injective")
    return m[np.argsort(m[:, 0], kind="stable")]


@dataclass
class RunConfig:
    """Flat run configuration for the generator.

    ``common`` defaults to min(n1, n2). With ``calibrate`` set, the
    layer-2 target degree is lowered so that the persisted layer reaches
    ``kbar2`` on average.
    """

    seed: int = 0
    n1: int = 10000
    kbar1: float = 8.0
    gamma1: float = 2.8
    t1: float = 0.7
    n2: int = 10000
    kbar2: float = 8.0
    gamma2: float = 2.3
    t2: float = 0.5
    nu: float = 0.5
    g: float = 0.5
    w: float = 0.4
    common: int | None = None
    bin_width: float = 1.0
    out: str = "out"
    calibrate: bool = False

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not self.bin_width > 0:
            raise ValueError(f"bin_width must be positive, got {self.bin_width}")
        if not 0 <= self.w <= 1:
            raise ValueError(f"w must lie in [0, 1], got {self.w}")
        if self.common is None:
            self.common = min(self.n1, self.n2)
        if not 0 <= self.common <= min(self.n1, self.n2):
            raise ValueError(f"common={self.common} must lie in [0, min(n1, n2)]")
        self.layer_params()
        self.correlation()

    def layer_params(self) -> tuple[LayerParams, LayerParams]:
        p1 = LayerParams(self.n1, self.kbar1, self.gamma1, self.t1)
        return p1, LayerParams(self.n2, self.kbar2, self.gamma2, self.t2)

    def correlation(self) -> CorrelationParams:
        return CorrelationParams(self.nu, self.g, self.n2)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config key {unknown[0]!r}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path) -> RunConfig:
    """Read a flat JSON object of RunConfig fields; unknown keys are errors."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    for key, value in data.items():
        if isinstance(value, (dict, list)):
            raise ValueError(f"{path}: config key {key!r} must be a scalar")
    return RunConfig.from_dict(data)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
