"""E[x2 | x1] from generated multiplexes against the rejection Monte-Carlo estimator."""
from pathlib import Path

import numpy as np

from _common import parser, write_rows
from gmmlp import analytics, theory
from gmmlp.coupling import CorrelationParams
from gmmlp.generator import generate_gmm
from gmmlp.geometry import derive_params
from gmmlp.graph import PairSet


def main():
    ap = parser(__doc__, "results/conditional_mean")
    ap.add_argument("--runs", type=int, default=6)
    ap.add_argument("--samples", type=int, default=5000)
    args = ap.parse_args()
    p1 = derive_params(5000, 6, 2.1, 0.5)
    p2 = derive_params(3000, 6, 2.5, 0.5)
    corr = CorrelationParams(0.5, 0.7, 3000)
    ctx = theory.TheoryContext(p1, p2, corr, 0.0)
    est = []
    for k in range(args.runs):
        m = generate_gmm(p1, p2, corr, 3000, np.random.default_rng(args.seed + k))
        est.append(analytics.conditional_mean_distance(PairSet.all_pairs(3000), m.common_coords1(),
                                                       m.common_coords2(), n_bins=50).estimate)
    est = np.array(est)
    rng = np.random.default_rng(args.seed + 1000)
    rows = []
    for b in range(4, 46):
        try:
            x2 = theory.monte_carlo_conditional_x2(b + 0.5, ctx, args.samples, rng, band=0.5, max_batches=200)
            mc = (float(x2.mean()), float(x2.std(ddof=1) / np.sqrt(x2.size)))
        except RuntimeError:
            # layer-1 distances this short are too rare to reach by rejection
            mc = (float("nan"), float("nan"))
        col = est[:, b]
        col = col[np.isfinite(col)]
        se = col.std(ddof=1) / np.sqrt(col.size) if col.size > 1 else float("nan")
        rows.append((b + 0.5, float(col.mean()) if col.size else float("nan"), float(se), *mc))
    write_rows(Path(args.out) / "conditional_mean.csv",
               ["x1", "generated_mean", "generated_se", "monte_carlo_mean", "monte_carlo_se"], rows)


if __name__ == "__main__":
    main()
