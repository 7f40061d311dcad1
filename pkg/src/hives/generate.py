"""Hive generation from matrix pairs by per-coefficient trace maximization."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import grassmann as gr
from .core import Hive, build_boundary, interior_vertices, validate_hive
from .ensembles import EnsembleSpec, derive_seeds, make_rng, sample, triple_from_pair

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerSettings:
    method: str = "trust-region"
    grad_norm_tol: float = 1e-7
    max_iters: int = 500
    retries_per_coefficient: int = 5
    retries_per_hive: int = 5
    hive_tolerance: float = 1e-6

    def __post_init__(self):
        if self.method not in ("trust-region", "gradient-descent"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.grad_norm_tol <= 0 or self.max_iters <= 0:
            raise ValueError("tolerance and iteration cap must be positive")
        if self.retries_per_coefficient < 0 or self.retries_per_hive < 0:
            raise ValueError("retry counts must be non-negative")


def subspace_dims(n: int, j: int, k: int) -> tuple[int, int]:
    """``(dim U, dim V)`` for vertex ``(j, k)``.

    Fixed by matching the three edges: ``k = 0`` gives partial sums of the
    spectrum of ``M`` (``U`` empty), ``j = 0`` those of ``M + N`` (``U = V``)
    and ``j + k = n`` adds ``tr M`` to partial sums of ``N`` (``V`` everything).
    """
    if j < 0 or k < 0 or j + k > n:
        raise ValueError(f"({j}, {k}) is not a vertex of a size-{n} hive")
    return k, j + k


@dataclass
class CoefficientResult:
    value: float
    converged: bool
    grad_norm: float
    attempts: int
    iterations: int = 0
    vertex: tuple = ()


def optimize_coefficient(M, N, j, k, settings=OptimizerSettings(), rng=None, sink=None) -> CoefficientResult:
    """Maximize ``tr(M|_V) + tr(N|_U)`` for the flag dimensions of ``(j, k)``.

    Restarts from fresh random pairs while attempts fail to converge and
    returns the best converged value (or the best seen if none converged).
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    dim_u, dim_v = subspace_dims(n, j, k)
    rng = rng if rng is not None else make_rng(0)
    solve = gr.trust_region if settings.method == "trust-region" else gr.gradient_descent
    best = None
    best_any = None
    attempts = 0
    total_iters = 0
    for _ in range(settings.retries_per_coefficient + 1):
        attempts += 1
        start = gr.gauge_fix(gr.random_pair(n, dim_u, dim_v - dim_u, rng))
        res = solve(M, N, start, grad_tol=settings.grad_norm_tol, max_iters=settings.max_iters)
        total_iters += res.iterations
        if sink is not None:
            sink(
                {
                    "vertex": [j, k],
                    "attempt": attempts,
                    "iterations": res.iterations,
                    "grad_norm": res.grad_norm,
                    "value": -res.cost,
                    "converged": res.converged,
                    "aborted": res.aborted,
                }
            )
        if res.aborted or not np.isfinite(res.cost):
            continue
        if best_any is None or -res.cost > -best_any.cost:
            best_any = res
        if res.converged:
            if best is None or -res.cost > -best.cost:
                best = res
            break
    chosen = best or best_any
    if chosen is None:
        return CoefficientResult(np.nan, False, np.nan, attempts, total_iters, (j, k))
    return CoefficientResult(
        float(-chosen.cost), bool(best is not None), float(chosen.grad_norm), attempts, total_iters, (j, k)
    )


@dataclass
class HiveResult:
    hive: Hive
    report: object
    diagnostics: dict = field(default_factory=dict)
    passes: int = 1

    @property
    def is_hive(self) -> bool:
        return self.report.is_hive


def generate_hive(pair, settings=OptimizerSettings(), rng=None, sink=None) -> HiveResult:
    """Boundary from spectra, interior by optimization, re-optimizing deficiencies.

    Re-optimization keeps the larger of the old and new value at every vertex,
    since each converged run is a lower bound on the maximum.
    """
    rng = rng if rng is not None else make_rng(0)
    triple = triple_from_pair(pair)
    base = build_boundary(triple)
    n = triple.n
    diag: dict = {}
    interior = {}
    for v in interior_vertices(n):
        res = optimize_coefficient(pair.M, pair.N, v[0], v[1], settings, rng, sink)
        diag[v] = res
        interior[v] = res.value
    hive = base.with_interior(interior)
    report = validate_hive(hive, settings.hive_tolerance)
    passes = 1
    while not report.is_hive and passes <= settings.retries_per_hive:
        passes += 1
        suspects = {v for r, _ in report.deficiencies for v in r.vertices if v in interior}
        for v in sorted(suspects):
            res = optimize_coefficient(pair.M, pair.N, v[0], v[1], settings, rng, sink)
            if np.isfinite(res.value) and (not np.isfinite(interior[v]) or res.value > interior[v]):
                interior[v] = res.value
                diag[v] = res
        hive = base.with_interior(interior)
        report = validate_hive(hive, settings.hive_tolerance)
    return HiveResult(hive, report, diag, passes)


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    alpha = 1 - level
    lo = 0.0 if successes == 0 else stats.beta.ppf(alpha / 2, successes, trials - successes + 1)
    hi = 1.0 if successes == trials else stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes)
    return float(lo), float(hi)


@dataclass
class ProbabilityResult:
    p_hat: float
    ci_low: float
    ci_high: float
    successes: int
    trials: int
    seeds: list

    def to_dict(self) -> dict:
        return asdict(self)


def success_probability(
    spec: EnsembleSpec, pairing: str, trials: int, settings=OptimizerSettings(), generator=None, workers=1
) -> ProbabilityResult:
    """Fraction of sampled pairs yielding a validated hive, with a 95% Clopper-Pearson interval.

    ``generator(pair, settings, rng) -> HiveResult`` defaults to :func:`generate_hive`.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    generator = generator or generate_hive
    seeds = derive_seeds(spec.seed, trials)

    def one(seed):
        pair = sample(spec.with_seed(seed), pairing)
        return bool(generator(pair, settings, make_rng(seed ^ 0x5EED)).is_hive)

    if workers > 1:
        from joblib import Parallel, delayed

        outcomes = Parallel(n_jobs=workers)(delayed(one)(s) for s in seeds)
    else:
        outcomes = [one(s) for s in seeds]
    for s, ok in zip(seeds, outcomes):
        log.debug("trial seed=%d hive=%s", s, ok)
    succ = int(sum(outcomes))
    lo, hi = clopper_pearson(succ, trials)
    return ProbabilityResult(succ / trials, lo, hi, succ, trials, seeds)


def derivative_checks(spec: EnsembleSpec, trials: int, pairing: str = "independent") -> list[dict]:
    """Gradient and Hessian Taylor checks on ``trials`` sampled pairs.

    Each trial draws a matrix pair and a random interior vertex, then a random
    point of the matching Grassmann product.
    """
    if spec.n < 3:
        raise ValueError("derivative checks need n >= 3 (an interior vertex)")
    out = []
    for seed in derive_seeds(spec.seed, trials):
        rng = make_rng(seed)
        pair = sample(spec.with_seed(seed), pairing)
        n = pair.n
        j = int(rng.integers(1, n - 1))
        k = int(rng.integers(1, n - j))
        dim_u, dim_v = subspace_dims(n, j, k)
        start = gr.random_pair(n, dim_u, dim_v - dim_u, rng)
        g = gr.check_gradient(pair.M, pair.N, start, rng)
        h = gr.check_hessian(pair.M, pair.N, start, rng)
        out.append({
            "seed": seed, "n": n, "j": j, "k": k,
            "grad_slope": g["slope"], "grad_residual": g["residual"],
            "hess_slope": h["slope"], "hess_residual": h["residual"], "symmetry_defect": h["symmetry_defect"],
        })
    return out
