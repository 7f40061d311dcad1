"""Mean hive surface and curvature fields for one ensemble."""

import argparse

from hives.ensembles import EnsembleSpec, derive_seeds, make_rng, sample
from hives.generate import generate_hive
from hives.surface import curvature, ensemble_curvature, mean_surface, surface_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ensemble", default="GOE")
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--pairing", default="identical", choices=["independent", "identical"])
    ap.add_argument("--mode", default="ensemble", choices=["ensemble", "mean-surface"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="surface.csv")
    args = ap.parse_args(argv)
    hives = []
    for s in derive_seeds(args.seed, args.count):
        res = generate_hive(sample(EnsembleSpec(args.ensemble, args.n, seed=s), args.pairing), rng=make_rng(s))
        if res.is_hive:
            hives.append(res.hive)
    surf = mean_surface(hives)
    field = ensemble_curvature(hives, args.mode) if args.mode == "ensemble" else curvature(surf)
    with open(args.out, "w") as fh:
        fh.write(surface_csv(surf, field))
    print(f"{len(hives)}/{args.count} valid hives; wrote {args.out}")


if __name__ == "__main__":
    main()
