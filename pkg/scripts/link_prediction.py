"""AUROC and AUPR of trans-layer link prediction across the score parameter w."""
from pathlib import Path

import numpy as np

from _common import parser, write_rows
from gmmlp import linkpred
from gmmlp.coupling import CorrelationParams
from gmmlp.generator import generate_gmm_lp
from gmmlp.geometry import derive_params


def main():
    ap = parser(__doc__, "results/link_prediction")
    ap.add_argument("--n", type=int, default=3000)
    ap.add_argument("--strength", type=float, default=0.5)
    ap.add_argument("--w", type=float, default=0.4, help="persistence used to generate the multiplex")
    ap.add_argument("--psi", nargs="+", default=["exp", "zero"])
    ap.add_argument("--w-grid", type=float, nargs="+", default=[0.0, 0.01, 0.2, 0.5, 0.9, 1.0])
    args = ap.parse_args()
    p1 = derive_params(args.n, 8, 2.8, 0.7)
    p2 = derive_params(args.n, 8, 2.3, 0.5)
    corr = CorrelationParams(args.strength, args.strength, args.n)
    m = generate_gmm_lp(p1, p2, corr, args.n, args.w, np.random.default_rng(args.seed))
    rows = []
    for psi in args.psi:
        kind = linkpred.PsiKind.parse(psi)
        for w, a, p in linkpred.sweep_w(m.common_coords1(), m.common_layer1(), m.common_layer2(), kind,
                                        args.w_grid):
            rows.append((str(kind), w, a, p))
    write_rows(Path(args.out) / "metrics.csv", ["psi", "w", "auroc", "aupr"], rows)


if __name__ == "__main__":
    main()
