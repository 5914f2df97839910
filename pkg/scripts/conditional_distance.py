"""Conditional layer-2 distance distribution of a pair with fixed layer-1 coordinates.

Writes the cubature CDF and finite-difference PDF next to an empirical
histogram and CDF from band-sampled pairs, for several layer-1 angular
distances.
"""
from pathlib import Path

import numpy as np

from _common import parser, write_rows
from gmmlp.coupling import CorrelationParams
from gmmlp.geometry import derive_params
from gmmlp import theory


def main():
    ap = parser(__doc__.splitlines()[0], "results/conditional_distance")
    ap.add_argument("--r1", type=float, default=18.0)
    ap.add_argument("--r1p", type=float, default=20.0)
    ap.add_argument("--dtheta1", type=float, nargs="+", default=[0.1, 0.5, 1.5])
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--step", type=float, default=0.1)
    args = ap.parse_args()

    p1 = derive_params(5000, 6, 2.1, 0.5)
    p2 = derive_params(3000, 6, 2.5, 0.5)
    ctx = theory.TheoryContext(p1, p2, CorrelationParams(0.5, 0.7, 3000), 0.0)
    grid = np.arange(0.0, 2 * p2.disc_radius + 0.5 * args.step, args.step)
    edges = np.append(grid, grid[-1] + args.step)
    rng = np.random.default_rng(args.seed)
    rows = []
    for d in args.dtheta1:
        cdf = theory.conditional_hyperbolic_cdf(grid, args.r1, args.r1p, d, ctx)
        pdf = theory.conditional_hyperbolic_pdf(grid, args.r1, args.r1p, d, ctx)
        x2 = np.sort(theory.empirical_conditional_x2(args.r1, args.r1p, d, ctx, args.samples, rng))
        hist = np.histogram(x2, bins=edges - 0.5 * args.step, density=True)[0]
        emp_cdf = np.searchsorted(x2, grid, side="right") / x2.size
        rows.extend(zip([d] * grid.size, grid, cdf, pdf, emp_cdf, hist))
    write_rows(Path(args.out) / "conditional_x2.csv",
               ["dtheta1", "x2", "cdf", "pdf", "empirical_cdf", "empirical_pdf"], rows)


if __name__ == "__main__":
    main()
