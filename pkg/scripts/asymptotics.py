"""Growth of E(2, d) and decay of the maximal-count probability.

Prints E_hat, E_hat / sqrt(d - 1), ln E_hat / ln(d - 1) and p_max, next to
the Kac-Rice value of E(2, d) computed by quadrature.
"""

import argparse
import math
from math import comb

import numpy as np
from scipy import integrate

from egtbench.ensembles import EnsembleSpec, asymptotics_probe


def kac_rice(d: int) -> float:
    v = np.array([comb(d - 1, k) ** 2 for k in range(d)], dtype=float)
    k = np.arange(d)
    m = d - 1

    def density(x):
        psi = x**k * (1 - x) ** (m - k)
        dpsi = psi * (k / x - (m - k) / (1 - x))
        a, b, c = v @ psi**2, v @ (psi * dpsi), v @ dpsi**2
        return math.sqrt(max(a * c - b * b, 0.0)) / a / math.pi

    return integrate.quad(density, 0, 1, limit=400)[0]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", default="2,3,5,10,20,40")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    d_values = [int(t) for t in args.d.split(",")]
    rows = asymptotics_probe(EnsembleSpec(seed=args.seed, trials=args.trials), d_values, workers=args.workers)
    print(f"{'d':>4} {'E_hat':>8} {'kac-rice':>9} {'E/sqrt':>8} {'lnE/ln':>8} {'p_max':>10}")
    for r in rows:
        log_ratio = math.log(r.mean_total) / math.log(r.d - 1) if r.d > 2 else float("nan")
        print(f"{r.d:>4} {r.mean_total:>8.4f} {kac_rice(r.d):>9.4f} {r.ratio_sqrt:>8.4f} {log_ratio:>8.4f} {r.p_max:>10.3g}")


if __name__ == "__main__":
    main()
