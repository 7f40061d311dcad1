"""Random symmetric matrix ensembles and their spectra."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import WeightTriple
from .errors import EigenFailure, InvalidSpec, NotSymmetric

KINDS = ("GOE", "SPD_NORMAL", "SPD_DIAG_DOMINANT", "SORTED_INT_DIAG", "FLIPPED_INT_DIAG")
ALIASES = {
    "SID": "SORTED_INT_DIAG",
    "FID": "FLIPPED_INT_DIAG",
    "SPD": "SPD_NORMAL",
    "SPDDD": "SPD_DIAG_DOMINANT",
}


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream; the only generator used in the package."""
    return np.random.Generator(np.random.Philox(int(seed) % 2**64))


def derive_seeds(seed: int, count: int) -> list[int]:
    """Independent 64-bit child seeds, reproducible from ``seed``."""
    ss = np.random.SeedSequence(int(seed) % 2**64)
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    n: int
    seed: int = 0
    int_low: int = 1
    int_high: int = 50
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = ALIASES.get(self.kind.upper(), self.kind.upper())
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise InvalidSpec(f"unknown ensemble {self.kind!r}; choose from {KINDS}")
        if self.n < 2:
            raise InvalidSpec("ensemble dimension must be >= 2")
        if self.int_low > self.int_high:
            raise InvalidSpec("int_low must not exceed int_high")

    def with_seed(self, seed: int) -> "EnsembleSpec":
        return EnsembleSpec(self.kind, self.n, seed, self.int_low, self.int_high, self.params)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "seed": self.seed,
            "int_low": self.int_low,
            "int_high": self.int_high,
        }


@dataclass(frozen=True)
class MatrixPair:
    M: np.ndarray
    N: np.ndarray
    pairing: str = "independent"

    @property
    def L(self) -> np.ndarray:
        return self.M + self.N

    @property
    def n(self) -> int:
        return self.M.shape[0]


def _goe(rng, n):
    g = rng.standard_normal((n, n))
    # off-diagonal N(0,1), diagonal N(0,2)
    return (g + g.T) / np.sqrt(2.0)


def _spd_normal(rng, n):
    g = rng.standard_normal((n, n))
    return g @ g.T / n


def _spd_diag_dominant(rng, n):
    m = _spd_normal(rng, n)
    off = np.abs(m).sum(axis=1) - np.abs(np.diag(m))
    return m + np.diag(off + 1.0)


def _sorted_int_diag(rng, n, lo, hi):
    d = np.sort(rng.integers(lo, hi + 1, size=n))[::-1]
    return np.diag(d.astype(float))


def _draw(kind, rng, spec):
    n = spec.n
    if kind == "GOE":
        return _goe(rng, n)
    if kind == "SPD_NORMAL":
        return _spd_normal(rng, n)
    if kind == "SPD_DIAG_DOMINANT":
        return _spd_diag_dominant(rng, n)
    return _sorted_int_diag(rng, n, spec.int_low, spec.int_high)


def flip_extremes(M: np.ndarray) -> np.ndarray:
    """Swap the first and last diagonal entries (largest and smallest when sorted)."""
    out = M.copy()
    out[0, 0], out[-1, -1] = M[-1, -1], M[0, 0]
    return out


def sample(spec: EnsembleSpec, pairing: str = "independent") -> MatrixPair:
    """Draw ``(M, N)``; identical pairing sets ``N = M``.

    ``FLIPPED_INT_DIAG`` draws exactly the sorted pair ``SORTED_INT_DIAG``
    would draw with the same seed and then flips the extremes of ``M``.
    """
    if pairing not in ("identical", "independent"):
        raise InvalidSpec(f"pairing must be identical or independent, got {pairing!r}")
    rng = make_rng(spec.seed)
    base = "SORTED_INT_DIAG" if spec.kind == "FLIPPED_INT_DIAG" else spec.kind
    M = _draw(base, rng, spec)
    N = M.copy() if pairing == "identical" else _draw(base, rng, spec)
    if spec.kind == "FLIPPED_INT_DIAG":
        M = flip_extremes(M)
    return MatrixPair(M, N, pairing)


def spectrum(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues in weakly decreasing order."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric("matrix must be square")
    scale = max(1.0, np.abs(M).max(initial=0.0))
    if np.abs(M - M.T).max(initial=0.0) > tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    try:
        w, Q = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    resid = np.linalg.norm(M - (Q * w) @ Q.T)
    if resid > 1e-8 * max(np.linalg.norm(M), 1e-300) and resid > 1e-12:
        raise EigenFailure(f"eigendecomposition residual {resid:.3e}")
    return w[::-1].copy()


def _maybe_int(vals: np.ndarray, integral: bool):
    if integral:
        r = np.rint(vals)
        if np.allclose(vals, r, atol=1e-9 * max(1.0, np.abs(vals).max())):
            return tuple(int(v) for v in r)
    return tuple(float(v) for v in vals)


def triple_from_pair(p: MatrixPair) -> WeightTriple:
    """Spectra of ``(M, N, M + N)``.

    Integer-valued diagonal pairs give an exact integer triple.
    """
    mats = (p.M, p.N, p.L)
    integral = all(
        np.array_equal(m, np.diag(np.diag(m))) and np.array_equal(np.diag(m), np.rint(np.diag(m)))
        for m in mats
    )
    mu, nu, lam = (_maybe_int(spectrum(m), integral) for m in mats)
    return WeightTriple(mu, nu, lam)
