"""Rounded and lattice estimators against the exact count on dilations of a tuple."""

import argparse
import json
import time

import numpy as np

from hives.core import WeightTriple
from hives.lrc import exact_lrc, lattice_lrc, rounded_lrc


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", default="40,30,20,10")
    ap.add_argument("--nu", default="40,30,20,10")
    ap.add_argument("--lambda", dest="lambda_", default="65,55,45,35")
    ap.add_argument("--dilations", default="1,2,3")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--rel-error", type=float, default=0.05)
    ap.add_argument("--out", default="lrc_accuracy.json")
    args = ap.parse_args(argv)
    parse = lambda s: tuple(int(x) for x in s.split(","))
    base = WeightTriple(parse(args.mu), parse(args.nu), parse(args.lambda_))
    records = []
    for m in map(int, args.dilations.split(",")):
        t = base.scaled(m)
        exact = exact_lrc(t).count
        for name, fn in (("rounded", rounded_lrc), ("lattice", lattice_lrc)):
            vals, times = [], []
            for s in range(args.seeds):
                t0 = time.perf_counter()
                vals.append(float(fn(t, args.rel_error, seed=s).estimate))
                times.append(time.perf_counter() - t0)
            err = float(np.mean(vals) / exact - 1) if exact else float("nan")
            records.append(dict(dilation=m, method=name, exact=exact, estimates=vals,
                                mean_rel_error=err, seconds=times))
            print(f"{m}x {name:8s} exact={exact} mean={np.mean(vals):.1f} err={err:+.3f}")
    with open(args.out, "w") as fh:
        json.dump(records, fh, indent=2)


if __name__ == "__main__":
    main()
