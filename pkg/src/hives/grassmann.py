"""Trace maximization over nested subspaces, recast on a product of Grassmannians.

A point is a pair ``(B, At)`` of matrices with orthonormal columns: ``span(B)``
is the inner subspace ``U`` and ``span([B | At])`` is the outer subspace ``V``.
The cost is

    -(tr(pi_V M pi_V) + tr(pi_U N pi_U))

with ``pi_V = A X A^T``, ``X = (A^T A)^{-1}``, ``A = [B | At]`` and
``pi_U = B Y B^T``, ``Y = (B^T B)^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import stats

from .errors import IllConditionedJointMatrix

COND_LIMIT = 1e12


def sym(Z: np.ndarray) -> np.ndarray:
    return 0.5 * (Z + Z.T)


def _inv(G: np.ndarray) -> np.ndarray:
    if G.size == 0:
        return np.zeros_like(G)
    return np.linalg.inv(G)


def orthonormalize(Z: np.ndarray) -> np.ndarray:
    if Z.shape[1] == 0:
        return Z.copy()
    q, r = np.linalg.qr(Z)
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


@dataclass(frozen=True)
class GrassmannPair:
    B: np.ndarray
    At: np.ndarray

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def k(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.At.shape[1]

    @property
    def A(self) -> np.ndarray:
        return np.hstack([self.B, self.At])

    @property
    def manifold_dim(self) -> int:
        return self.k * (self.n - self.k) + self.p * (self.n - self.p)


def random_pair(n: int, k: int, p: int, rng: np.random.Generator) -> GrassmannPair:
    """Gaussian start, orthonormalized: uniform on each Grassmannian."""
    return GrassmannPair(
        orthonormalize(rng.standard_normal((n, k))),
        orthonormalize(rng.standard_normal((n, p))),
    )


class CostContext:
    """Per-point cache of the inverses and projectors the derivatives reuse."""

    def __init__(self, M, N, pair: GrassmannPair, cond_limit: float = COND_LIMIT):
        self.M = np.asarray(M, dtype=float)
        self.N = np.asarray(N, dtype=float)
        self.pair = pair
        A = pair.A
        G = A.T @ A
        self.cond = np.linalg.cond(G) if G.size else 1.0
        if not np.isfinite(self.cond) or self.cond > cond_limit:
            raise IllConditionedJointMatrix(f"cond(A^T A) = {self.cond:.3e}")
        self.A = A
        self.X = _inv(G)
        k = pair.k
        self.X1, self.X2 = self.X[:k, :k], self.X[:k, k:]
        self.X3, self.X4 = self.X[k:, :k], self.X[k:, k:]
        self.Y = _inv(pair.B.T @ pair.B)
        self.piV = A @ self.X @ A.T
        self.piU = pair.B @ self.Y @ pair.B.T
        self.I = np.eye(pair.n)

    def cost(self) -> float:
        f = np.trace(self.piV @ self.M @ self.piV)
        g = np.trace(self.piU @ self.N @ self.piU)
        return -(f + g)

    def euclid_grad(self):
        """Euclidean gradient of the cost with respect to ``(B, At)``.

        ``grad_A f = 4 (I - pi_V) S(M pi_V) A X``, split by column blocks, and
        ``grad_B g = 2 (I - pi_U) N B Y``; the factor 4 on ``f`` is what
        central differences confirm.
        """
        k = self.pair.k
        SM = sym(self.M @ self.piV)
        gf = 4.0 * (self.I - self.piV) @ SM @ self.A @ self.X
        gB = 2.0 * (self.I - self.piU) @ self.N @ self.pair.B @ self.Y
        return -(gf[:, :k] + gB), -gf[:, k:]

    def euclid_hess(self, dB, dAt):
        """Directional derivative of :meth:`euclid_grad` along ``(dB, dAt)``."""
        k = self.pair.k
        A, X, piV, M = self.A, self.X, self.piV, self.M
        B, Y, piU, N = self.pair.B, self.Y, self.piU, self.N
        dA = np.hstack([dB, dAt])
        dX = -X @ (dA.T @ A + A.T @ dA) @ X
        dpiV = dA @ X @ A.T + A @ dX @ A.T + A @ X @ dA.T
        SM = sym(M @ piV)
        hf = 4.0 * (
            (self.I - piV) @ (sym(M @ dpiV) @ A @ X + SM @ (dA @ X + A @ dX))
            - dpiV @ SM @ A @ X
        )
        dY = -Y @ (dB.T @ B + B.T @ dB) @ Y
        dpiU = dB @ Y @ B.T + B @ dY @ B.T + B @ Y @ dB.T
        hg = 2.0 * ((self.I - piU) @ N @ (dB @ Y + B @ dY) - dpiU @ N @ B @ Y)
        return -(hf[:, :k] + hg), -hf[:, k:]

    # Riemannian versions on Gr_k x Gr_p with orthonormal representatives

    def riemannian_grad(self):
        return tangent_project(self.pair, self.euclid_grad())

    def riemannian_hess(self, direction):
        dB, dAt = direction
        eB, eA = self.euclid_hess(dB, dAt)
        gB, gA = self.euclid_grad()
        hB, hA = tangent_project(self.pair, (eB, eA))
        B, At = self.pair.B, self.pair.At
        return hB - dB @ (B.T @ gB), hA - dAt @ (At.T @ gA)


def cost(M, N, pair: GrassmannPair) -> float:
    return CostContext(M, N, pair).cost()


def euclid_grad(M, N, pair: GrassmannPair):
    return CostContext(M, N, pair).euclid_grad()


def euclid_hess(M, N, pair: GrassmannPair, direction):
    return CostContext(M, N, pair).euclid_hess(*direction)


def tangent_project(pair: GrassmannPair, direction):
    """Horizontal part: remove the components inside each column span."""
    ZB, ZA = direction
    B, At = pair.B, pair.At
    return ZB - B @ (B.T @ ZB), ZA - At @ (At.T @ ZA)


def _polar(Z: np.ndarray) -> np.ndarray:
    if Z.shape[1] == 0:
        return Z.copy()
    u, _, vt = np.linalg.svd(Z, full_matrices=False)
    return u @ vt


def retract(pair: GrassmannPair, tangent) -> GrassmannPair:
    """Polar (second-order) retraction; output columns are orthonormal."""
    dB, dAt = tangent
    return GrassmannPair(_polar(pair.B + dB), _polar(pair.At + dAt))


def inner(u, v) -> float:
    return float(np.sum(u[0] * v[0]) + np.sum(u[1] * v[1]))


def norm(u) -> float:
    return float(np.sqrt(inner(u, u)))


def _axpy(a, x, y):
    return (a * x[0] + y[0], a * x[1] + y[1])


def random_tangent(pair: GrassmannPair, rng, unit: bool = True):
    d = tangent_project(pair, (rng.standard_normal(pair.B.shape), rng.standard_normal(pair.At.shape)))
    if unit:
        nrm = norm(d)
        if nrm > 0:
            d = (d[0] / nrm, d[1] / nrm)
    return d


def gauge_fix(pair: GrassmannPair) -> GrassmannPair:
    """Re-orthogonalize ``At`` against ``B`` without changing ``span([B | At])``."""
    B, At = pair.B, pair.At
    if B.shape[1] == 0 or At.shape[1] == 0:
        return pair
    return GrassmannPair(B, orthonormalize(At - B @ (B.T @ At)))


# -- derivative checks -------------------------------------------------------


def _loglog_slope(ts, errs):
    """Theil-Sen slope of ``log err`` against ``log t``.

    A median of pairwise slopes ignores the odd point where two Taylor terms
    of opposite sign nearly cancel.
    """
    ts, errs = np.asarray(ts), np.asarray(errs)
    ok = errs > 0
    return float(stats.theilslopes(np.log10(errs[ok]), np.log10(ts[ok]))[0])


def _mp_matrix(Z):
    return mpmath.matrix(np.asarray(Z, dtype=float).tolist())


def line_cost(M, N, pair: GrassmannPair, direction, t, dps: int = 40):
    """Cost at ``pair + t * direction`` in ``dps``-digit arithmetic.

    The cost only depends on column spans, so the straight line needs no
    retraction. Forming the shifted point exactly removes the ``1e-16``
    floor that would otherwise swamp the small-``t`` remainders.
    """
    with mpmath.workdps(dps):
        t = mpmath.mpf(t)
        k = pair.k
        A = _mp_matrix(pair.A) + t * _mp_matrix(np.hstack(direction))
        Mm, Nm = _mp_matrix(M), _mp_matrix(N)
        f = (A.T * A) ** -1 * (A.T * Mm * A)
        val = sum(f[i, i] for i in range(f.rows))
        if k:
            B = A[:, :k]
            g = (B.T * B) ** -1 * (B.T * Nm * B)
            val += sum(g[i, i] for i in range(g.rows))
        return -val


def check_gradient(M, N, pair, rng, t_range=(1e-6, 1e-2), points=9):
    """First-order Taylor remainder ``|f(x + t d) - f(x) - t <grad, d>|``.

    Returns the log-log slope (2 for a correct gradient) and the residual
    ``||egrad - P(egrad)||``; span invariance makes the Euclidean gradient
    horizontal already, so this should sit at roundoff.
    """
    ctx = CostContext(M, N, pair)
    g = ctx.riemannian_grad()
    d = random_tangent(pair, rng)
    a1 = mpmath.mpf(inner(g, d))
    f0 = line_cost(M, N, pair, d, 0)
    ts = np.logspace(np.log10(t_range[0]), np.log10(t_range[1]), points)
    errs = [float(abs(line_cost(M, N, pair, d, t) - f0 - mpmath.mpf(t) * a1)) for t in ts]
    eg = ctx.euclid_grad()
    residual = norm(_axpy(-1.0, tangent_project(pair, eg), eg))
    return {"slope": _loglog_slope(ts, errs), "residual": residual, "ts": ts.tolist(), "errors": errs}


def check_hessian(M, N, pair, rng, t_range=(1e-6, 1e-2), points=9):
    """Second-order remainder slope (3 expected), tangency and symmetry."""
    ctx = CostContext(M, N, pair)
    g = ctx.riemannian_grad()
    d = random_tangent(pair, rng)
    Hd = ctx.riemannian_hess(d)
    a1, a2 = mpmath.mpf(inner(g, d)), mpmath.mpf(inner(d, Hd))
    f0 = line_cost(M, N, pair, d, 0)
    ts = np.logspace(np.log10(t_range[0]), np.log10(t_range[1]), points)
    errs = []
    for t in ts:
        tm = mpmath.mpf(t)
        errs.append(float(abs(line_cost(M, N, pair, d, t) - f0 - tm * a1 - tm * tm * a2 / 2)))
    residual = norm(_axpy(-1.0, tangent_project(pair, Hd), Hd))
    d1, d2 = random_tangent(pair, rng), random_tangent(pair, rng)
    lhs = inner(d1, ctx.riemannian_hess(d2))
    rhs = inner(ctx.riemannian_hess(d1), d2)
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return {
        "slope": _loglog_slope(ts, errs),
        "residual": residual,
        "symmetry": (lhs, rhs),
        "symmetry_defect": abs(lhs - rhs) / scale,
        "ts": ts.tolist(),
        "errors": errs,
    }


# -- solvers -----------------------------------------------------------------


@dataclass
class SolverResult:
    pair: GrassmannPair
    cost: float
    grad_norm: float
    iterations: int
    converged: bool
    aborted: bool = False
    message: str = ""


def _tcg(ctx, grad, delta, max_inner, kappa=0.1, theta=1.0):
    """Steihaug-Toint truncated CG on the tangent space."""
    pair = ctx.pair
    eta = (np.zeros_like(grad[0]), np.zeros_like(grad[1]))
    Heta = (np.zeros_like(grad[0]), np.zeros_like(grad[1]))
    r = grad
    r_r = inner(r, r)
    g_norm = np.sqrt(r_r)
    p = (-r[0], -r[1])
    for _ in range(max_inner):
        Hp = tangent_project(pair, ctx.riemannian_hess(p))
        kappa_p = inner(p, Hp)
        alpha = r_r / kappa_p if kappa_p > 0 else np.inf
        eta_new = _axpy(alpha, p, eta) if np.isfinite(alpha) else None
        if kappa_p <= 0 or norm(eta_new) >= delta:
            # step to the trust-region boundary along p
            e_p, p_p, e_e = inner(eta, p), inner(p, p), inner(eta, eta)
            tau = (-e_p + np.sqrt(max(e_p * e_p + p_p * (delta * delta - e_e), 0.0))) / p_p
            return _axpy(tau, p, eta), _axpy(tau, Hp, Heta)
        eta, Heta = eta_new, _axpy(alpha, Hp, Heta)
        r = _axpy(alpha, Hp, r)
        r_r_new = inner(r, r)
        if np.sqrt(r_r_new) <= g_norm * min(g_norm**theta, kappa):
            break
        beta = r_r_new / r_r
        r_r = r_r_new
        p = tangent_project(pair, _axpy(beta, p, (-r[0], -r[1])))
    return eta, Heta


def trust_region(M, N, pair, grad_tol=1e-7, max_iters=500, max_inner=None, fix_gauge=True, log=None):
    """Riemannian trust-region with truncated CG inner solves."""
    dim = pair.manifold_dim
    try:
        ctx = CostContext(M, N, pair)
    except IllConditionedJointMatrix as exc:
        return SolverResult(pair, np.nan, np.nan, 0, False, True, str(exc))
    f = ctx.cost()
    if dim == 0:
        return SolverResult(pair, f, 0.0, 0, True)
    delta_bar = np.sqrt(max(pair.k + pair.p, 1)) * np.pi / 2
    delta = delta_bar / 8
    max_inner = max_inner or dim
    grad = ctx.riemannian_grad()
    g_norm = norm(grad)
    it = 0
    while g_norm > grad_tol and it < max_iters:
        it += 1
        eta, Heta = _tcg(ctx, grad, delta, max_inner)
        model_decrease = -(inner(grad, eta) + 0.5 * inner(eta, Heta))
        cand = retract(ctx.pair, eta)
        try:
            ctx_new = CostContext(M, N, cand)
        except IllConditionedJointMatrix as exc:
            return SolverResult(ctx.pair, f, g_norm, it, False, True, str(exc))
        f_new = ctx_new.cost()
        actual = f - f_new
        # guard the ratio near convergence where both decreases hit roundoff
        rho = (actual + 1e-14 * max(1.0, abs(f))) / (model_decrease + 1e-14 * max(1.0, abs(f)))
        eta_norm = norm(eta)
        if rho < 0.25:
            delta *= 0.25
        elif rho > 0.75 and eta_norm >= 0.99 * delta:
            delta = min(2 * delta, delta_bar)
        if rho > 0.1 and model_decrease > 0:
            new_pair = gauge_fix(cand) if fix_gauge else cand
            try:
                ctx = CostContext(M, N, new_pair) if fix_gauge else ctx_new
            except IllConditionedJointMatrix as exc:
                return SolverResult(cand, f_new, g_norm, it, False, True, str(exc))
            f = ctx.cost()
            grad = ctx.riemannian_grad()
            g_norm = norm(grad)
        if log is not None:
            log({"iter": it, "cost": f, "grad_norm": g_norm, "delta": delta, "rho": rho})
        if delta < 1e-14:
            break
    return SolverResult(ctx.pair, f, g_norm, it, bool(g_norm <= grad_tol))


def gradient_descent(M, N, pair, grad_tol=1e-7, max_iters=500, fix_gauge=True, log=None):
    """Riemannian steepest descent with Armijo backtracking."""
    try:
        ctx = CostContext(M, N, pair)
    except IllConditionedJointMatrix as exc:
        return SolverResult(pair, np.nan, np.nan, 0, False, True, str(exc))
    f = ctx.cost()
    grad = ctx.riemannian_grad()
    g_norm = norm(grad)
    step = 1.0
    it = 0
    while g_norm > grad_tol and it < max_iters:
        it += 1
        t = step
        while True:
            cand = retract(ctx.pair, (-t * grad[0], -t * grad[1]))
            try:
                ctx_new = CostContext(M, N, gauge_fix(cand) if fix_gauge else cand)
            except IllConditionedJointMatrix as exc:
                return SolverResult(ctx.pair, f, g_norm, it, False, True, str(exc))
            f_new = ctx_new.cost()
            if f_new <= f - 1e-4 * t * g_norm**2 or t < 1e-12:
                break
            t *= 0.5
        step = min(2 * t, 10.0)
        ctx, f = ctx_new, f_new
        grad = ctx.riemannian_grad()
        g_norm = norm(grad)
        if log is not None:
            log({"iter": it, "cost": f, "grad_norm": g_norm, "step": t})
    return SolverResult(ctx.pair, f, g_norm, it, bool(g_norm <= grad_tol))
