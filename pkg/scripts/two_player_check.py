"""Compare Monte Carlo E(n, 2) with the closed form 1 / 2**(n-1)."""

import argparse

from egtbench.ensembles import EnsembleSpec, closed_form_two_player, estimate_stats


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-n", type=int, default=6)
    args = ap.parse_args()

    print(f"{'n':>3} {'estimate':>10} {'stderr':>9} {'closed':>9} {'z':>6}")
    for n in range(2, args.max_n + 1):
        s = estimate_stats(EnsembleSpec(seed=args.seed, trials=args.trials), n, 2)
        ref = closed_form_two_player(n)
        z = (s.mean_total - ref) / s.stderr_total
        print(f"{n:>3} {s.mean_total:>10.5f} {s.stderr_total:>9.5f} {ref:>9.5f} {z:>+6.2f}")


if __name__ == "__main__":
    main()
