"""Effective gain and fidelities versus |alpha| for a few reflectivities.

Writes a CSV suitable for plotting g_eff, F_eff, F_ideal against alpha.
"""

import argparse

import numpy as np

from stochamp.cli import curves_rows, render


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=float, nargs="+", default=[0.1, 0.25, 0.4])
    ap.add_argument("--alpha-max", type=float, default=1.5)
    ap.add_argument("--points", type=int, default=61)
    ap.add_argument("-o", "--output", default="curves.csv")
    args = ap.parse_args()

    alphas = np.linspace(args.alpha_max / args.points, args.alpha_max, args.points)
    rows = curves_rows(alphas, args.r)
    with open(args.output, "w") as fh:
        fh.write(render(rows, "csv", {}))
    for r in args.r:
        sel = [row for row in rows if row["r"] == r]
        print(f"r={r}: g_eff {sel[0]['g_eff']:.4f} -> {sel[-1]['g_eff']:.4f}, "
              f"F_eff {sel[0]['F_eff']:.4f} -> {sel[-1]['F_eff']:.4f}")
    print(f"wrote {len(rows)} rows to {args.output}")


if __name__ == "__main__":
    main()
