"""Continuum volume and the rounded lattice-count estimator.

The hive polytope ``A x <= b`` is relaxed to ``Q: A x <= b + 2``. Since every
row has at most four unit coefficients, the unit cube around each integer hive
lies inside ``Q``, so ``vol(Q)`` times the fraction of uniform points of ``Q``
that round to an integer hive is an unbiased lattice count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.special import gammaln

from ..core import HivePolytope, WeightTriple, assemble_polytope
from ..ensembles import make_rng
from ..errors import DegenerateDimension, EmptyPolytope, StartNotInterior, UnboundedPolytope

Z95 = 1.959963984540054


@dataclass(frozen=True)
class Polyhedron:
    A: np.ndarray
    b: np.ndarray

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @classmethod
    def box(cls, lo, hi) -> "Polyhedron":
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        d = len(lo)
        return cls(np.vstack([np.eye(d), -np.eye(d)]), np.concatenate([hi, -lo]))

    @classmethod
    def simplex(cls, d: int) -> "Polyhedron":
        return cls(np.vstack([-np.eye(d), np.ones((1, d))]), np.concatenate([np.zeros(d), [1.0]]))

    def contains(self, x, tol=0.0) -> bool:
        return bool(np.all(self.A @ np.asarray(x, float) <= self.b + tol))


def as_polyhedron(p, dilation: float = 0.0) -> Polyhedron:
    if isinstance(p, Polyhedron):
        return Polyhedron(p.A, p.b + dilation) if dilation else p
    if isinstance(p, HivePolytope):
        return Polyhedron(p.A.astype(float), p.b.astype(float) + dilation)
    A, b = p
    return Polyhedron(np.asarray(A, float), np.asarray(b, float) + dilation)


def chebyshev_center(poly: Polyhedron):
    """Largest inscribed ball ``(center, radius)`` via LP."""
    d = poly.dim
    norms = np.linalg.norm(poly.A, axis=1)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.column_stack([poly.A, norms]), b_ub=poly.b,
                  bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status == 2:
        raise EmptyPolytope("polytope is empty")
    if res.status == 3:
        raise UnboundedPolytope("inscribed ball is unbounded")
    if res.status != 0:
        raise EmptyPolytope(f"Chebyshev LP failed: {res.message}")
    r = res.x[-1]
    if r <= 1e-12:
        raise EmptyPolytope("polytope has empty interior")
    return res.x[:d], float(r)


def bounding_box(poly: Polyhedron):
    d = poly.dim
    lo, hi = np.empty(d), np.empty(d)
    for i in range(d):
        for sign, out in ((1.0, hi), (-1.0, lo)):
            c = np.zeros(d)
            c[i] = -sign
            res = linprog(c, A_ub=poly.A, b_ub=poly.b, bounds=[(None, None)] * d, method="highs")
            if res.status == 3:
                raise UnboundedPolytope(f"coordinate {i} is unbounded")
            if res.status != 0:
                raise EmptyPolytope(res.message)
            out[i] = -res.fun * sign
    return lo, hi


def _har_steps(A, b, X, AX, steps, rng, radius=None, record_every=0):
    """Advance all chains (rows of ``X``) by ``steps`` hit-and-run moves.

    Chords are exact: ratio tests against every halfspace and, when ``radius``
    is set, the ball ``|x| <= radius`` centered at the origin.
    """
    C, d = X.shape
    out = []
    for s in range(steps):
        U = rng.standard_normal((C, d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        AU = U @ A.T
        slack = np.maximum(b - AX, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = slack / AU
        tmax = np.where(AU > 1e-15, ratio, np.inf).min(axis=1)
        tmin = np.where(AU < -1e-15, ratio, -np.inf).max(axis=1)
        if radius is not None:
            xu = np.einsum("ij,ij->i", X, U)
            disc = np.maximum(xu * xu - np.einsum("ij,ij->i", X, X) + radius * radius, 0.0)
            root = np.sqrt(disc)
            tmax = np.minimum(tmax, -xu + root)
            tmin = np.maximum(tmin, -xu - root)
        t = tmin + (tmax - tmin) * rng.random(C)
        X += t[:, None] * U
        AX += t[:, None] * AU
        if record_every and (s + 1) % record_every == 0:
            out.append(X.copy())
    return out


def hit_and_run(p, x0, steps: int, seed: int = 0, rng=None) -> np.ndarray:
    """Single hit-and-run chain from a strictly interior ``x0``; returns ``steps x d``."""
    poly = as_polyhedron(p)
    rng = rng if rng is not None else make_rng(seed)
    x0 = np.asarray(x0, float)
    if not np.all(poly.A @ x0 < poly.b):
        raise StartNotInterior("x0 must satisfy every inequality strictly")
    X = x0[None, :].copy()
    AX = X @ poly.A.T
    rec = _har_steps(poly.A, poly.b, X, AX, steps, rng, record_every=1)
    return np.vstack(rec)


@dataclass
class RoundedBody:
    """``x = shift + L y`` with ``A L y <= b - A shift``; the origin is the Chebyshev center."""

    A: np.ndarray
    b: np.ndarray
    shift: np.ndarray
    L: np.ndarray
    r_in: float
    r_out: float

    @property
    def log_det(self) -> float:
        return float(np.linalg.slogdet(self.L)[1])

    def to_x(self, Y):
        return self.shift + Y @ self.L.T


def round_body(poly: Polyhedron, rng, rounds: int = 3, chains: int = 64) -> RoundedBody:
    """Affine-normalize a copy of ``poly`` with sample covariances, then recenter.

    The transform only serves sampling and volume; callers map points back
    before any lattice test.
    """
    d = poly.dim
    shift = np.zeros(d)
    L = np.eye(d)
    A, b = poly.A.copy(), poly.b.copy()
    for _ in range(rounds if d > 1 else 0):
        c, _r = chebyshev_center(Polyhedron(A, b))
        X = np.repeat(c[None, :], chains, axis=0)
        AX = X @ A.T
        _har_steps(A, b, X, AX, 10 * d, rng)
        rec = _har_steps(A, b, X, AX, max(20, 4 * d), rng, record_every=2)
        S = np.vstack(rec)
        cov = np.cov(S.T) + 1e-12 * np.eye(d)
        Lc = np.linalg.cholesky(cov)
        shift = shift + L @ S.mean(axis=0)
        L = L @ Lc
        A = poly.A @ L
        b = poly.b - poly.A @ shift
        scale = np.linalg.norm(A, axis=1)
        A, b = A / scale[:, None], b / scale
    c, r = chebyshev_center(Polyhedron(A, b))
    shift = shift + L @ c
    b = b - A @ c
    lo, hi = bounding_box(Polyhedron(A, b))
    r_out = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))
    return RoundedBody(A, b, shift, L, r, r_out)


def log_ball_volume(d: int, r: float) -> float:
    return 0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1) + d * math.log(r)


@dataclass
class VolumeEstimate:
    value: float
    rel_error_target: float
    samples_used: int
    seed: int
    phases: int = 0
    ratios: list = field(default_factory=list, repr=False)
    body: RoundedBody | None = field(default=None, repr=False)
    chains: np.ndarray | None = field(default=None, repr=False)


def continuum_volume(p, rel_error: float = 0.05, seed: int = 0, dilation: float = 0.0, chains: int = 100,
                     confidence_z: float = 2.5, max_samples_per_phase: int = 2_000_000) -> VolumeEstimate:
    """Multiphase Monte Carlo volume over balls ``r_i = r_0 2^{i/d}``.

    Each phase estimates ``vol(Q & B(r_{i-1})) / vol(Q & B(r_i))`` from thinned
    hit-and-run samples, until the phase's relative standard error is below
    ``rel_error / (confidence_z * sqrt(phases))``.
    """
    poly = as_polyhedron(p, dilation)
    rng = make_rng(seed)
    body = round_body(poly, rng)
    d = poly.dim
    r0, R = body.r_in, body.r_out
    m = max(0, math.ceil(d * math.log2(R / r0)))
    radii = [r0 * 2 ** (i / d) for i in range(m + 1)]
    per_phase = rel_error / (confidence_z * math.sqrt(max(m, 1)))
    A, b = body.A, body.b
    X = np.zeros((chains, d))
    AX = X @ A.T
    log_vol = log_ball_volume(d, r0)
    ratios = []
    used = 0
    thin = max(1, d)
    for i in range(1, m + 1):
        outer = None if i == m else radii[i]
        inner = radii[i - 1]
        _har_steps(A, b, X, AX, 5 * d + 10, rng, radius=outer)
        hits = total = 0
        while True:
            rec = _har_steps(A, b, X, AX, 10 * thin, rng, radius=outer, record_every=thin)
            S = np.vstack(rec)
            hits += int(np.count_nonzero(np.einsum("ij,ij->i", S, S) <= inner * inner))
            total += len(S)
            if hits and total >= 200:
                q = hits / total
                if math.sqrt((1 - q) / (q * total)) <= per_phase or total >= max_samples_per_phase:
                    break
        ratios.append(hits / total)
        log_vol -= math.log(hits / total)
        used += total
    log_vol += body.log_det
    return VolumeEstimate(math.exp(log_vol), rel_error, used, seed, m, ratios, body, X)


@dataclass
class RoundedResult:
    estimate: float
    f: float
    vol_Q: float
    samples: int
    hits: int
    seed: int
    rel_error: float
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "f": self.f, "vol_Q": self.vol_Q, "samples": self.samples,
                "hits": self.hits, "seed": self.seed, "rel_error": self.rel_error, "elapsed": self.elapsed}


def rounding_fraction(poly: HivePolytope, vol: VolumeEstimate, rel_error: float, rng, dilation: float = 2.0,
                      max_samples: int = 5_000_000):
    """Sample ``Q`` uniformly and count points whose nearest-integer rounding is a hive.

    Stops once the 95% half-width of ``f`` is below ``rel_error * f``.
    """
    body = vol.body
    A, b = body.A, body.b
    X = vol.chains.copy() if vol.chains is not None else np.zeros((100, poly.dim))
    AX = X @ A.T
    d = poly.dim
    thin = max(1, d)
    _har_steps(A, b, X, AX, 5 * d + 10, rng)
    Aint, bint = poly.A, poly.b
    hits = total = 0
    while total < max_samples:
        rec = _har_steps(A, b, X, AX, 10 * thin, rng, record_every=thin)
        Y = np.vstack(rec)
        Z = np.rint(body.to_x(Y)).astype(np.int64)
        ok = np.all(Z @ Aint.T <= bint, axis=1)
        hits += int(np.count_nonzero(ok))
        total += len(Y)
        if hits and total >= 500:
            f = hits / total
            if Z95 * math.sqrt(f * (1 - f) / total) <= rel_error * f:
                break
    return hits, total


def rounded_lrc(triple: WeightTriple, rel_error: float = 0.05, seed: int = 0, dilation: float = 2.0) -> RoundedResult:
    """``f * vol(Q)`` for the relaxation ``A x <= b + dilation``."""
    t0 = time.perf_counter()
    if not triple.is_integer:
        raise ValueError("rounded_lrc needs an integer triple")
    try:
        poly = assemble_polytope(triple)
    except DegenerateDimension:
        from ..core import build_boundary, validate_hive

        ok = float(validate_hive(build_boundary(triple), 0).is_hive)
        return RoundedResult(ok, ok, ok, 0, int(ok), seed, rel_error, time.perf_counter() - t0)
    if linprog(np.zeros(poly.dim), A_ub=poly.A, b_ub=poly.b, bounds=[(None, None)] * poly.dim,
               method="highs").status == 2:
        return RoundedResult(0.0, 0.0, 0.0, 0, 0, seed, rel_error, time.perf_counter() - t0)
    rng = make_rng(seed)
    vol = continuum_volume(poly, rel_error, seed=int(rng.integers(2**63)), dilation=dilation)
    hits, total = rounding_fraction(poly, vol, rel_error, rng, dilation)
    f = hits / total
    return RoundedResult(f * vol.value, f, vol.value, total + vol.samples_used, hits, seed, rel_error,
                         time.perf_counter() - t0)
