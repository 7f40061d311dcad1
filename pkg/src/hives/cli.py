"""Command-line front end.

``hive <command>`` covers gen, validate, stats, gradcheck, probability and
``lrc {exact,rounded,lattice}``; ``lrc <method>`` is a shortcut for the last.
Results go to stdout as JSON (and to ``--out``); plot data goes to CSV; each
run can also write a replayable record via ``--record``.

Exit codes: 0 ok, 2 usage, 3 numerical failure, 4 infeasible input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import errors as E
from .core import Hive, WeightTriple, assemble_polytope, parse_weights, validate_hive
from .ensembles import EnsembleSpec, derive_seeds, make_rng, sample
from .generate import OptimizerSettings, derivative_checks, generate_hive, success_probability
from .surface import ensemble_curvature, mean_surface, surface_csv

log = logging.getLogger("hives")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4

PROBABILITY_HEADER = ["ensemble", "pairing", "n", "int_low", "int_high", "trials", "successes", "p_hat",
                      "ci_low", "ci_high", "seed"]
GRADCHECK_HEADER = ["trial", "seed", "n", "j", "k", "grad_slope", "grad_residual", "hess_slope",
                    "hess_residual", "symmetry_defect"]


class UsageError(Exception):
    pass


@dataclass
class RunRecord:
    command: list
    config: dict
    input_hash: str
    outputs: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=_jsonable)


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=_jsonable).encode()
    return "sha256:" + hashlib.sha256(blob).hexdigest()


def thread_cap(requested: int | None) -> int:
    cap = os.environ.get("HIVE_THREADS")
    n = requested or 1
    if cap:
        try:
            n = min(n, max(1, int(cap))) if requested else max(1, int(cap))
        except ValueError as exc:
            raise UsageError(f"HIVE_THREADS must be an integer, got {cap!r}") from exc
    return n


def parse_range(text: str) -> tuple[int, int]:
    """``"1:50"`` -> ``(1, 50)``."""
    try:
        lo, hi = (int(v) for v in str(text).split(":"))
    except ValueError as exc:
        raise UsageError(f"expected LO:HI, got {text!r}") from exc
    if lo > hi:
        raise UsageError(f"empty range {text!r}")
    return lo, hi


def parse_dims(text) -> list[int]:
    """``"6"``, ``"4..8"`` or ``"4,6,8"``."""
    text = str(text)
    try:
        if ".." in text:
            lo, hi = (int(v) for v in text.split(".."))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --dim {text!r}; use N, LO..HI or N1,N2") from exc


def _triple(cfg) -> WeightTriple:
    if cfg.get("mu") is None or cfg.get("nu") is None or cfg.get("lambda_") is None:
        raise UsageError("--mu, --nu and --lambda are required")
    return WeightTriple(parse_weights(cfg["mu"]), parse_weights(cfg["nu"]), parse_weights(cfg["lambda_"]))


def _spec(cfg, n=None) -> EnsembleSpec:
    lo, hi = parse_range(cfg["int_range"])
    dims = parse_dims(cfg["dim"]) if n is None else [n]
    if len(dims) != 1:
        raise UsageError("this command takes a single --dim")
    return EnsembleSpec(cfg["ensemble"], dims[0], int(cfg["seed"]), lo, hi)


def _settings(cfg) -> OptimizerSettings:
    return OptimizerSettings(
        method=cfg["method"], grad_norm_tol=cfg["grad_tol"], max_iters=cfg["max_iters"],
        retries_per_coefficient=cfg["retries_per_coefficient"], retries_per_hive=cfg["retries_per_hive"],
        hive_tolerance=cfg["hive_tolerance"],
    )


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# -- commands ------------------------------------------------------------------


def cmd_gen(cfg, rec):
    spec = _spec(cfg)
    settings = _settings(cfg)
    diag_path = cfg.get("diagnostics")
    if diag_path is None and cfg.get("out"):
        diag_path = os.path.splitext(cfg["out"])[0] + ".diagnostics.jsonl"
    diag = open(diag_path, "w") if diag_path else None
    hives = []
    try:
        for trial, seed in enumerate(derive_seeds(spec.seed, cfg["trials"])):
            pair = sample(spec.with_seed(seed), cfg["pairing"])

            def sink(r, _trial=trial, _seed=seed):
                if diag:
                    diag.write(json.dumps({"trial": _trial, "seed": _seed, **r}, default=_jsonable) + "\n")

            res = generate_hive(pair, settings, make_rng(seed ^ 0x5EED), sink)
            entry = json.loads(res.hive.to_json())
            entry.update({"trial": trial, "seed": seed, "is_hive": res.is_hive, "passes": res.passes,
                          "deficiencies": res.report.to_dict()["deficiencies"]})
            hives.append(entry)
            log.info("trial %d seed %d hive=%s", trial, seed, res.is_hive)
    finally:
        if diag:
            diag.close()
    n_ok = sum(h["is_hive"] for h in hives)
    return {"ensemble": spec.to_dict(), "pairing": cfg["pairing"], "trials": len(hives), "hives_found": n_ok,
            "diagnostics": diag_path, "hives": hives}


def cmd_validate(cfg, rec):
    if cfg.get("hive"):
        with open(cfg["hive"]) as fh:
            h = Hive.from_json(fh.read())
    else:
        t = _triple(cfg)
        if cfg.get("interior") is None:
            raise UsageError("give --hive FILE or --mu/--nu/--lambda with --interior")
        h = assemble_polytope(t).embed(parse_weights(cfg["interior"]))
    report = validate_hive(h, cfg["tolerance"])
    return report.to_dict()


def cmd_stats(cfg, rec):
    spec = _spec(cfg)
    settings = _settings(cfg)
    workers = thread_cap(cfg.get("workers"))
    seeds = derive_seeds(spec.seed, cfg["samples"])

    def one(seed):
        pair = sample(spec.with_seed(seed), cfg["pairing"])
        return generate_hive(pair, settings, make_rng(seed ^ 0x5EED))

    if workers > 1:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=workers)(delayed(one)(s) for s in seeds)
    else:
        results = [one(s) for s in seeds]
    hives = [r.hive for r in results if r.is_hive or cfg["include_failures"]]
    if not hives:
        raise E.NeverConverged("no hive was produced")
    field_ = ensemble_curvature(hives, cfg["mode"])
    surf = mean_surface(hives)
    csv_path = cfg.get("csv") or (os.path.splitext(cfg["out"])[0] + ".surface.csv" if cfg.get("out") else None)
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write(surface_csv(surf, field_))
    inner = ~surf.boundary_mask
    return {"ensemble": spec.to_dict(), "pairing": cfg["pairing"], "samples": len(seeds), "hives": len(hives),
            "mode": cfg["mode"], "csv": csv_path,
            "mean_gaussian": float(field_.gaussian[inner].mean()) if inner.any() else 0.0,
            "mean_mean_curvature": float(field_.mean[inner].mean()) if inner.any() else 0.0,
            "seeds": seeds}


def cmd_gradcheck(cfg, rec):
    spec = _spec(cfg)
    rows = derivative_checks(spec, cfg["trials"], cfg["pairing"])
    ok = all(1.9 <= r["grad_slope"] <= 2.1 and 2.85 <= r["hess_slope"] <= 3.1 and r["grad_residual"] <= 1e-10
             and r["symmetry_defect"] <= 1e-8 for r in rows)
    if cfg.get("csv"):
        _write_csv(cfg["csv"], GRADCHECK_HEADER, [[i] + [r[h] for h in GRADCHECK_HEADER[1:]]
                                                  for i, r in enumerate(rows)])
    out = {"trials": rows, "all_in_band": ok,
           "grad_slope_range": [min(r["grad_slope"] for r in rows), max(r["grad_slope"] for r in rows)],
           "hess_slope_range": [min(r["hess_slope"] for r in rows), max(r["hess_slope"] for r in rows)]}
    if not ok:
        rec.outputs = out
        raise E.HiveError("derivative check outside the expected bands")
    return out


def cmd_probability(cfg, rec):
    settings = _settings(cfg)
    workers = thread_cap(cfg.get("workers"))
    rows, results = [], []
    for n in parse_dims(cfg["dim"]):
        spec = _spec(cfg, n)
        res = success_probability(spec, cfg["pairing"], cfg["trials"], settings, workers=workers)
        log.info("n=%d p_hat=%.3f seeds=%s", n, res.p_hat, res.seeds)
        rows.append([spec.kind, cfg["pairing"], n, spec.int_low, spec.int_high, res.trials, res.successes,
                     res.p_hat, res.ci_low, res.ci_high, spec.seed])
        results.append({"n": n, **res.to_dict()})
    if cfg.get("csv"):
        _write_csv(cfg["csv"], PROBABILITY_HEADER, rows)
    return {"ensemble": cfg["ensemble"], "pairing": cfg["pairing"], "results": results, "csv": cfg.get("csv")}


def cmd_lrc(cfg, rec):
    from .lrc.lattice import lattice_lrc
    from .lrc.oracle import exact_lrc
    from .lrc.rounded import rounded_lrc

    t = _triple(cfg)
    if not t.is_integer:
        raise UsageError("LRC commands need integer weights")
    method = cfg["method_lrc"]
    t0 = time.perf_counter()
    if method == "exact":
        res = exact_lrc(t, cap=cfg["cap"], keep_points=0)
        return {"count": res.count, "nodes": res.nodes, "elapsed": time.perf_counter() - t0}
    if method == "rounded":
        return rounded_lrc(t, cfg["rel_error"], cfg["seed"], cfg["dilation"]).to_dict()
    return lattice_lrc(t, cfg["rel_error"], cfg["seed"]).to_dict()


COMMANDS = {"gen": cmd_gen, "validate": cmd_validate, "stats": cmd_stats, "gradcheck": cmd_gradcheck,
            "probability": cmd_probability, "lrc": cmd_lrc}


# -- parser ------------------------------------------------------------------------


def _common(p):
    p.add_argument("--config", help="JSON file whose keys override flags (a saved run record also works)")
    p.add_argument("--out", help="write the JSON result here")
    p.add_argument("--record", help="write a replayable run record here")
    p.add_argument("-v", "--verbose", action="store_true")


def _ensemble(p, dim_default="6", ensemble_default="SPD"):
    p.add_argument("--ensemble", default=ensemble_default,
                   help="GOE, SPD_NORMAL (SPD), SPD_DIAG_DOMINANT (SPDDD), SORTED_INT_DIAG (SID), "
                        "FLIPPED_INT_DIAG (FID)")
    p.add_argument("--dim", default=dim_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--int-range", "--range", dest="int_range", default="1:50")
    p.add_argument("--pairing", choices=("identical", "independent"), default="independent")


def _optimizer(p):
    p.add_argument("--method", choices=("trust-region", "gradient-descent"), default="trust-region")
    p.add_argument("--grad-tol", type=float, default=1e-7)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--retries-per-coefficient", type=int, default=5)
    p.add_argument("--retries-per-hive", type=int, default=5)
    p.add_argument("--hive-tolerance", type=float, default=1e-6)
    p.add_argument("--workers", type=int, default=None, help="worker processes (capped by HIVE_THREADS)")


def _weights(p):
    p.add_argument("--mu")
    p.add_argument("--nu")
    p.add_argument("--lambda", dest="lambda_")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hive", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate hives from sampled matrix pairs")
    _common(p)
    _ensemble(p)
    _optimizer(p)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--diagnostics", help="JSON-lines file, one record per coefficient attempt")

    p = sub.add_parser("validate", help="check the rhombus inequalities of a hive")
    _common(p)
    _weights(p)
    p.add_argument("--hive", help="hive JSON file")
    p.add_argument("--interior", help="interior values in coordinate order")
    p.add_argument("--tolerance", type=float, default=1e-9)

    p = sub.add_parser("stats", help="mean surface and curvature over sampled hives")
    _common(p)
    _ensemble(p, "6", "GOE")
    _optimizer(p)
    p.add_argument("--samples", type=int, default=60)
    p.add_argument("--mode", choices=("ensemble", "mean-surface"), default="ensemble")
    p.add_argument("--csv", help="surface CSV (j,k,x,y,height,K,H)")
    p.add_argument("--include-failures", action="store_true")

    p = sub.add_parser("gradcheck", help="Taylor-remainder slopes of the gradient and Hessian")
    _common(p)
    _ensemble(p, "6", "SPD")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--csv")

    p = sub.add_parser("probability", help="hive success probability with 95%% intervals")
    _common(p)
    _ensemble(p, "4..8", "SID")
    _optimizer(p)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--csv")

    p = sub.add_parser("lrc", help="Littlewood-Richardson coefficient")
    p.add_argument("method_lrc", choices=("exact", "rounded", "lattice"))
    _common(p)
    _weights(p)
    p.add_argument("--rel-error", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=10**6, help="search-node cap for exact")
    p.add_argument("--dilation", type=float, default=2.0, help="relaxation for rounded")
    return ap


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if isinstance(data, dict) and "config" in data and "command" in data:
        data = data["config"]
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    cfg = vars(ns)
    logging.basicConfig(level=logging.INFO if cfg.pop("verbose") else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    rec = None
    try:
        if cfg.get("config"):
            override = _load_config(cfg["config"])
            if "lambda" in override:
                override["lambda_"] = override.pop("lambda")
            unknown = set(override) - set(cfg)
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            cfg.update(override)
        clean = {k: v for k, v in cfg.items() if k not in ("config", "out", "record")}
        rec = RunRecord(argv, clean, config_hash(clean))
        if "seed" in cfg:
            log.info("seed %s", cfg["seed"])
        t0 = time.perf_counter()
        outputs = COMMANDS[cfg["command"]](cfg, rec)
        rec.outputs = outputs
        rec.timing = {"wall_seconds": time.perf_counter() - t0}
        text = json.dumps(outputs, default=_jsonable)
        if cfg.get("out"):
            with open(cfg["out"], "w") as fh:
                fh.write(json.dumps(outputs, indent=2, default=_jsonable))
        print(text)
        code = EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (E.InfeasibleLP, E.EmptyPolytope, E.SaturationViolated) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        code = EXIT_INFEASIBLE
    except (E.LengthMismatch, E.NotWeaklyDecreasing, E.InvalidSpec, E.IncompleteHive, E.DegenerateDimension,
            FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (E.HiveError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    if cfg.get("record") and rec is not None:
        rec.timing.setdefault("exit_code", code)
        with open(cfg["record"], "w") as fh:
            fh.write(rec.to_json())
    return code


def main(argv=None) -> int:
    return dispatch(argv)


def lrc_main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    return dispatch(["lrc", *argv])


if __name__ == "__main__":
    sys.exit(main())
