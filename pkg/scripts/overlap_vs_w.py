"""Edge overlap of the two layers as a function of w for several correlation strengths."""
from pathlib import Path

import numpy as np

from _common import parser, write_rows
from gmmlp import analytics
from gmmlp.coupling import CorrelationParams
from gmmlp.generator import apply_link_persistence, generate_gmm
from gmmlp.geometry import derive_params


def main():
    ap = parser(__doc__, "results/overlap")
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--strengths", type=float, nargs="+", default=[1e-4, 0.5, 0.9])
    ap.add_argument("--w-grid", type=float, nargs="+", default=[0.0, 0.2, 0.4, 0.7, 1.0])
    args = ap.parse_args()
    p1 = derive_params(args.n, 8, 2.8, 0.7)
    p2 = derive_params(args.n, 8, 2.3, 0.5)
    rows = []
    for s in args.strengths:
        # one GMM per strength; persistence draws are nested across w
        m = generate_gmm(p1, p2, CorrelationParams(s, s, args.n), args.n, np.random.default_rng(args.seed))
        for w in args.w_grid:
            mw = apply_link_persistence(m, w, np.random.default_rng(args.seed + 1))
            rows.append((s, w, analytics.edge_overlap(mw)))
    write_rows(Path(args.out) / "overlap.csv", ["strength", "w", "overlap"], rows)


if __name__ == "__main__":
    main()
