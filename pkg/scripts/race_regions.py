"""Governance regions of the AI race over (s, p_r).

Runs the stationary-distribution sweep, compares the Region II label with
the analytic band 1 - 1/s < p_r < 1 - 1/(3s), and draws a coarse text map
(I = '.', II = 'o', III = '#').  Optionally writes the sweep CSV.
"""

import argparse

import numpy as np

from egtbench.race import RaceParams, Region, analytic_region_ii, sweep_race, sweep_to_csv

GLYPH = {Region.I: ".", Region.II: "o", Region.III: "#", Region.ANOMALOUS: "?"}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=101)
    ap.add_argument("--W", type=float, default=1.0)
    ap.add_argument("--beta-sel", type=float, default=1.0)
    ap.add_argument("--mirror", action="store_true", help="CS mirrors its opponent from round one")
    ap.add_argument("--csv")
    args = ap.parse_args()

    s_axis = np.linspace(1.01, 3.0, args.points)
    p_axis = np.linspace(0.0, 1.0, args.points)
    base = RaceParams(W=args.W, beta_sel=args.beta_sel, cs_opens_safe=not args.mirror)
    rows = sweep_race(s_axis, p_axis, base)
    agree = np.mean([(r.region == Region.II) == analytic_region_ii(r.s, r.p_r) for r in rows])
    print(f"Region II agreement with the analytic band: {agree:.2%}")

    labels = np.array([r.region for r in rows], dtype=object).reshape(args.points, args.points)
    stride = max(1, args.points // 40)
    for j in range(args.points - 1, -1, -2 * stride):
        line = "".join(GLYPH[labels[i, j]] for i in range(0, args.points, stride))
        print(f"p_r={p_axis[j]:4.2f} {line}")
    print(f"{'':9}s from {s_axis[0]:.2f} to {s_axis[-1]:.2f}")

    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(sweep_to_csv(rows))


if __name__ == "__main__":
    main()
