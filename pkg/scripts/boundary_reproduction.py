"""Compare optimized boundary coefficients against spectral partial sums."""

import argparse
import csv

from hives.core import build_boundary, vertices
from hives.ensembles import EnsembleSpec, derive_seeds, make_rng, sample, triple_from_pair
from hives.generate import optimize_coefficient


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--pairs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="boundary.csv")
    args = ap.parse_args(argv)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "j", "k", "optimized", "exact", "rel_error"])
        worst = 0.0
        for seed in derive_seeds(args.seed, args.pairs):
            pair = sample(EnsembleSpec("SPD", args.n, seed=seed))
            bnd = build_boundary(triple_from_pair(pair))
            rng = make_rng(seed)
            for j, k in vertices(args.n):
                if j and k and j + k < args.n:
                    continue
                v = optimize_coefficient(pair.M, pair.N, j, k, rng=rng).value
                ref = bnd[(j, k)]
                err = abs(v - ref) / abs(ref) if ref else abs(v)
                worst = max(worst, err)
                w.writerow([seed, j, k, repr(v), repr(ref), repr(err)])
    print(f"worst relative error {worst:.3e}; wrote {args.out}")


if __name__ == "__main__":
    main()
