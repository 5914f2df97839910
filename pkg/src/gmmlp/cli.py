"""Command-line interface: generate, embed, analyze, predict, theory.

Every failure exits with status 2 after printing one JSON object
``{"error": <kind>, "message": <text>}`` on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from . import analytics, graph, io, linkpred, theory
from .embedding import EmbeddingConfig, embed_layer, estimate_gamma, log_likelihood
from .generator import Multiplex, apply_link_persistence, calibrate_mean_degree, generate_gmm
from .geometry import LayerParams, connection_probability, expected_degree_at_radius

log = logging.getLogger("gmmlp")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _write_table(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([_fmt(v) for v in row])


# --- generate -----------------------------------------------------------------------------------

def _layer2_ids(n1: int, n2: int, common: int) -> list[str]:
    return [str(j) if j < common else str(n1 + j - common) for j in range(n2)]


def cmd_generate(args) -> int:
    cfg = io.load_config(args.config) if args.config else io.RunConfig()
    over = {k: v for k, v in (("seed", args.seed), ("out", args.out), ("bin_width", args.bins)) if v is not None}
    if over:
        cfg = io.RunConfig.from_dict({**cfg.to_dict(), **over})
    p1, p2 = cfg.layer_params()
    target2 = cfg.kbar2
    if cfg.calibrate:
        target2 = calibrate_mean_degree(cfg.kbar2, cfg.kbar1, cfg.w, cfg.n2)
        p2 = LayerParams(cfg.n2, target2, cfg.gamma2, cfg.t2)
    rng = np.random.default_rng(cfg.seed)
    m = generate_gmm(p1, p2, cfg.correlation(), cfg.common, rng, args.threads)
    m = apply_link_persistence(m, cfg.w, rng)
    out = io.ensure_dir(cfg.out)
    ids1 = [str(i) for i in range(cfg.n1)]
    ids2 = _layer2_ids(cfg.n1, cfg.n2, cfg.common)
    io.write_edge_list(out / "layer1.edges", m.layer1, ids1)
    io.write_edge_list(out / "layer2.edges", m.layer2, ids2)
    io.write_coords(out / "layer1.coords", m.coords1, ids1)
    io.write_coords(out / "layer2.coords", m.coords2, ids2)
    io.write_pairs(out / "persistent.edges", m.persistent_edges, ids2)
    corr = cfg.correlation()
    io.write_json(out / "manifest.json", {
        "command": "generate",
        "config": cfg.to_dict(),
        "layer1": p1.as_dict(),
        "layer2": p2.as_dict(),
        "layer2_target_degree": target2,
        "correlation": {"nu": corr.nu, "g": corr.g, "eta_copula": corr.eta_copula,
                        "sigma0": corr.sigma0, "sigma": corr.sigma, "n_nodes": corr.n_nodes},
        "edges": {"layer1": graph.edge_count(m.layer1), "layer2": graph.edge_count(m.layer2),
                  "persistent": int(m.persistent_edges.shape[0])},
        "layer1_ids": ids1,
        "layer2_ids": ids2,
        "files": ["layer1.edges", "layer2.edges", "layer1.coords", "layer2.coords", "persistent.edges"],
    })
    return 0


# --- embed --------------------------------------------------------------------------------------

def cmd_embed(args) -> int:
    g = io.parse_edge_list(args.edges)
    deg = graph.degrees(g.adjacency)
    gamma = args.gamma if args.gamma is not None else estimate_gamma(deg)
    kbar = args.mean_degree if args.mean_degree is not None else float(deg.mean())
    params = LayerParams(len(g.ids), kbar, gamma, args.temperature)
    config = EmbeddingConfig(candidate_angles=args.candidates, refinement_passes=args.passes)
    history: list = []
    coords = embed_layer(g.adjacency, params, config, np.random.default_rng(args.seed), history)
    io.write_coords(args.out, coords, g.ids)
    ll = history[-1] if history else log_likelihood(coords, g.adjacency, params)
    summary = {"command": "embed", "edges": str(args.edges), "seed": args.seed, "params": params.as_dict(),
               "gamma_estimated": args.gamma is None, "log_likelihood": ll, "history": history,
               "dropped_self_loops": g.self_loops, "dropped_duplicates": g.duplicates, "ids": g.ids}
    io.write_json(f"{args.out}.json", summary)
    print(json.dumps({"log_likelihood": ll}))
    return 0


# --- analyze ------------------------------------------------------------------------------------

def _load_layer(edges_path, coords_path):
    coords, ids = io.read_coords(coords_path)
    g = io.parse_edge_list(edges_path, ids)
    if len(g.ids) != len(ids):
        raise ValueError(f"{edges_path}: node id {g.ids[len(ids)]!r} has no coordinates")
    return g.adjacency, coords, ids


def _n_bins(coords, bin_width) -> int:
    return int(math.floor(2.0 * float(coords.radial.max()) / bin_width)) + 1


def cmd_analyze(args) -> int:
    adj1, c1, ids1 = _load_layer(args.layer1_edges, args.layer1_coords)
    adj2, c2, ids2 = _load_layer(args.layer2_edges, args.layer2_coords)
    pairs = io.read_node_map(args.node_map) if args.node_map else None
    node_map = io.align_common(ids1, ids2, pairs)
    m = Multiplex(adj1, adj2, c1, c2, node_map)
    bw = args.bins
    cc1, cc2, a2 = m.common_coords1(), m.common_coords2(), m.common_layer2()
    nb1, nb2 = _n_bins(cc1, bw), _n_bins(cc2, bw)
    out = io.ensure_dir(args.out)
    classes = analytics.classify_pairs(m)
    curves = {}
    for name, ps in classes.sets().items():
        curves[f"p_trans_{name}"] = analytics.trans_layer_probability(ps, cc1, a2, bw, nb1)
        curves[f"p2_{name}"] = analytics.within_layer_probability(ps, cc2, a2, bw, nb2)
        curves[f"mean_x2_{name}"] = analytics.conditional_mean_distance(ps, cc1, cc2, bw, nb1)
    for name, curve in curves.items():
        curve.to_csv(out / f"{name}.csv")
    r_thr = args.r_threshold if args.r_threshold is not None else float(c2.radial.max())
    summary = {"command": "analyze", "bin_width": bw, "common_nodes": m.common_count, "r_threshold": r_thr,
               "weighted": args.weighted, "pairs": {k: len(v) for k, v in classes.sets().items()}}
    try:
        summary["overlap"] = analytics.edge_overlap(m)
    except ValueError as exc:
        summary["overlap"], summary["overlap_error"] = None, str(exc)
    try:
        w, sigma = analytics.estimate_w(curves["p_trans_c"], r_thr, args.weighted)
        summary["w"], summary["sigma_w"] = w, sigma
    except ValueError as exc:
        summary["w"], summary["sigma_w"], summary["w_error"] = None, None, str(exc)
    io.write_json(out / "summary.json", summary)
    print(json.dumps({k: summary[k] for k in ("overlap", "w", "sigma_w")}))
    return 0


# --- predict ------------------------------------------------------------------------------------

def cmd_predict(args) -> int:
    adj1, c1, ids1 = _load_layer(args.layer1_edges, args.layer1_coords)
    ids2 = None
    if args.layer2_coords:
        _, ids2 = io.read_coords(args.layer2_coords)
    g2 = io.parse_edge_list(args.layer2_edges, ids2)
    pairs = io.read_node_map(args.node_map) if args.node_map else None
    node_map = io.align_common(ids1, g2.ids, pairs)
    if node_map.shape[0] < 2:
        raise ValueError("need at least two common nodes")
    a1 = graph.induced_subgraph(adj1, node_map[:, 0])
    a2 = graph.induced_subgraph(g2.adjacency, node_map[:, 1])
    psi = linkpred.PsiKind.parse(args.psi)
    rows = linkpred.sweep_w(c1.subset(node_map[:, 0]), a1, a2, psi, args.w_grid)
    _write_table(args.out, ["w", "auroc", "aupr"], rows)
    return 0


# --- theory -------------------------------------------------------------------------------------

def cmd_theory(args) -> int:
    cfg = io.load_config(args.config) if args.config else io.RunConfig()
    p1, p2 = cfg.layer_params()
    ctx = theory.TheoryContext(p1, p2, cfg.correlation(), cfg.w, quad_rel_tol=args.rel_tol)
    regime = theory.parse_regime(args.regime)
    bw = args.bins if args.bins is not None else cfg.bin_width
    out = io.ensure_dir(args.out)
    R1, R2 = p1.disc_radius, p2.disc_radius

    x2 = (np.arange(int(math.floor(2 * R2 / bw)) + 1) + 0.5) * bw
    _write_table(out / "p2_all.csv", ["x2", "p2", "eta", "p2_all"],
                 zip(x2, connection_probability(x2, p2),
                     np.broadcast_to(theory.eta_limits(ctx, x2, regime), x2.shape),
                     theory.p2_all_prediction(ctx, x2, regime)))
    x1 = (np.arange(int(math.floor(2 * R1 / bw)) + 1) + 0.5) * bw
    _write_table(out / "trans_layer.csv", ["x1", "connected", "disconnected"],
                 zip(x1, np.broadcast_to(theory.trans_layer_limits(ctx, x1, "connected", regime), x1.shape),
                     np.broadcast_to(theory.trans_layer_limits(ctx, x1, "disconnected", regime), x1.shape)))
    r = np.linspace(0.0, R2, 201)
    k2 = theory.kbar2_tilde_prediction(ctx, r, regime)
    lower, upper = (k2, k2) if regime == theory.UNCORRELATED else k2
    _write_table(out / "kbar2_tilde.csv", ["r", "kbar2", "lower", "upper"],
                 zip(r, expected_degree_at_radius(r, p2), np.broadcast_to(lower, r.shape),
                     np.broadcast_to(upper, r.shape)))
    lo, hi = theory.average_degree_bounds(ctx)
    summary = {"command": "theory", "regime": regime, "config": cfg.to_dict(), "layer1": p1.as_dict(),
               "layer2": p2.as_dict(), "average_degree_lower": lo, "average_degree_upper": hi,
               "average_degree_uncorrelated": theory.average_degree_uncorrelated(ctx)}
    if args.dtheta1:
        if args.r1 is None or args.r1p is None:
            raise ValueError("--dtheta1 needs --r1 and --r1p")
        grid = np.arange(0.0, 2 * R2 + 0.5 * args.x2_step, args.x2_step)
        rows = []
        for d in args.dtheta1:
            cdf = theory.conditional_hyperbolic_cdf(grid, args.r1, args.r1p, d, ctx)
            pdf = theory.conditional_hyperbolic_pdf(grid, args.r1, args.r1p, d, ctx)
            rows.extend(zip(np.full(grid.size, d), grid, cdf, pdf))
        _write_table(out / "conditional_x2.csv", ["dtheta1", "x2", "cdf", "pdf"], rows)
        summary.update(r1=args.r1, r1p=args.r1p, dtheta1=args.dtheta1, x2_step=args.x2_step)
    io.write_json(out / "theory.json", summary)
    return 0


# --- entry point --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gmmlp", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                    help="worker threads (results do not depend on it)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a GMM-LP multiplex")
    g.add_argument("--config", help="flat JSON run configuration")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output directory")
    g.add_argument("--bins", type=float, help="bin width recorded in the manifest")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("embed", help="embed one layer into the hyperbolic disc")
    e.add_argument("edges")
    e.add_argument("--out", required=True, help="coordinate file to write")
    e.add_argument("--gamma", type=float, help="power-law exponent (estimated from degrees if omitted)")
    e.add_argument("--temperature", type=float, default=0.5)
    e.add_argument("--mean-degree", type=float, help="target average degree (observed if omitted)")
    e.add_argument("--candidates", type=int, default=360)
    e.add_argument("--passes", type=int, default=3)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_embed)

    a = sub.add_parser("analyze", help="trans-layer statistics of a two-layer system")
    a.add_argument("--layer1-edges", required=True)
    a.add_argument("--layer2-edges", required=True)
    a.add_argument("--layer1-coords", required=True)
    a.add_argument("--layer2-coords", required=True)
    a.add_argument("--node-map", help="lines 'id1 id2' of common nodes (default: shared ids)")
    a.add_argument("--bins", type=float, default=1.0, help="bin width")
    a.add_argument("--r-threshold", type=float, help="plateau threshold (default: largest layer-2 radius)")
    a.add_argument("--weighted", action="store_true", help="pair-weighted plateau average")
    a.add_argument("--out", required=True, help="output directory")
    a.set_defaults(func=cmd_analyze)

    p = sub.add_parser("predict", help="trans-layer link prediction sweep over w")
    p.add_argument("--layer1-edges", required=True)
    p.add_argument("--layer1-coords", required=True)
    p.add_argument("--layer2-edges", required=True)
    p.add_argument("--layer2-coords", help="only its ids are used, so isolated layer-2 nodes count")
    p.add_argument("--node-map")
    p.add_argument("--psi", default="exp", help="exp, zero or const:C")
    p.add_argument("--w-grid", type=_float_list, default=[0.0, 0.01, 0.2, 0.5, 0.9, 1.0])
    p.add_argument("--out", required=True, help="metrics CSV")
    p.set_defaults(func=cmd_predict)

    t = sub.add_parser("theory", help="reference curves")
    t.add_argument("--config")
    t.add_argument("--regime", choices=["uncorrelated", "max"], default="uncorrelated")
    t.add_argument("--bins", type=float)
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--r1", type=float)
    t.add_argument("--r1p", type=float)
    t.add_argument("--dtheta1", type=_float_list, help="comma-separated layer-1 angular distances")
    t.add_argument("--x2-step", type=float, default=0.1)
    t.add_argument("--rel-tol", type=float, default=1e-6)
    t.set_defaults(func=cmd_theory)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        args.threads = 1
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, json.JSONDecodeError) as exc:
        kind = type(exc).__name__
        print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
