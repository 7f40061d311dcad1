"""Taylor-slope checks of the gradient and Hessian over sampled SPD pairs.

Writes one CSV row per check: seed, n, j, k, slopes, residuals, symmetry defect.
"""

import argparse
import csv

from hives.ensembles import EnsembleSpec
from hives.generate import derivative_checks


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", default="3,4,5,6,7,8")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="gradcheck.csv")
    args = ap.parse_args(argv)
    rows = []
    for n in map(int, args.dims.split(",")):
        rows += derivative_checks(EnsembleSpec("SPD", n, seed=args.seed + n), args.trials)
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
