import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hives import grassmann as gr
from hives.ensembles import EnsembleSpec, make_rng, sample
from hives.errors import IllConditionedJointMatrix


def _setup(n=6, k=2, p=2, seed=0):
    rng = make_rng(seed)
    pair = sample(EnsembleSpec("SPD", n, seed=seed))
    return pair.M, pair.N, gr.random_pair(n, k, p, rng), rng


def test_pair_invariants():
    _, _, pair, _ = _setup()
    assert np.allclose(pair.B.T @ pair.B, np.eye(2), atol=1e-10)
    assert np.allclose(pair.At.T @ pair.At, np.eye(2), atol=1e-10)
    assert pair.manifold_dim == 2 * (6 - 2) + 2 * (6 - 2)


def test_cost_identity():
    n, k, p = 5, 2, 1
    pair = gr.random_pair(n, k, p, make_rng(1))
    assert gr.cost(np.eye(n), np.eye(n), pair) == pytest.approx(-(2 * k + p), abs=1e-10)


def test_cost_top_eigenspace():
    M, N, _, rng = _setup(n=5, seed=3)
    w, Q = np.linalg.eigh(M)
    pair = gr.GrassmannPair(np.zeros((5, 0)), Q[:, -2:])
    assert gr.cost(M, N, pair) == pytest.approx(-w[-2:].sum(), abs=1e-10)


def test_span_invariance():
    M, N, pair, rng = _setup(seed=4)
    Q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    rotated = gr.GrassmannPair(pair.B @ Q, pair.At)
    assert gr.cost(M, N, rotated) == pytest.approx(gr.cost(M, N, pair), abs=1e-10)
    g1 = gr.norm(gr.CostContext(M, N, pair).riemannian_grad())
    g2 = gr.norm(gr.CostContext(M, N, rotated).riemannian_grad())
    assert g1 == pytest.approx(g2, abs=1e-8)
    # non-orthonormal representatives describe the same subspaces
    S = rng.standard_normal((2, 2)) + 3 * np.eye(2)
    mixed = gr.GrassmannPair(pair.B @ S, pair.At)
    assert gr.cost(M, N, mixed) == pytest.approx(gr.cost(M, N, pair), abs=1e-8)


def test_zero_matrices_zero_gradient():
    _, _, pair, _ = _setup()
    Z = np.zeros((6, 6))
    gB, gA = gr.euclid_grad(Z, Z, pair)
    assert np.all(gB == 0) and np.all(gA == 0)


def test_hessian_linear_and_zero():
    M, N, pair, rng = _setup(seed=5)
    ctx = gr.CostContext(M, N, pair)
    zero = (np.zeros_like(pair.B), np.zeros_like(pair.At))
    HB, HA = ctx.euclid_hess(*zero)
    assert np.allclose(HB, 0) and np.allclose(HA, 0)
    d1, d2 = gr.random_tangent(pair, rng), gr.random_tangent(pair, rng)
    lhs = ctx.euclid_hess(2 * d1[0] + d2[0], 2 * d1[1] + d2[1])
    a, b = ctx.euclid_hess(*d1), ctx.euclid_hess(*d2)
    assert np.allclose(lhs[0], 2 * a[0] + b[0]) and np.allclose(lhs[1], 2 * a[1] + b[1])


def test_gradient_matches_central_differences():
    M, N, pair, rng = _setup(seed=6)
    gB, gA = gr.euclid_grad(M, N, pair)
    E = rng.standard_normal(pair.B.shape)
    F = rng.standard_normal(pair.At.shape)
    h = 1e-6
    fd = (gr.cost(M, N, gr.GrassmannPair(pair.B + h * E, pair.At + h * F))
          - gr.cost(M, N, gr.GrassmannPair(pair.B - h * E, pair.At - h * F))) / (2 * h)
    assert fd == pytest.approx(np.sum(gB * E) + np.sum(gA * F), rel=1e-6)


def test_hessian_matches_gradient_differences():
    M, N, pair, rng = _setup(seed=7)
    E, F = rng.standard_normal(pair.B.shape), rng.standard_normal(pair.At.shape)
    h = 1e-6
    gp = gr.euclid_grad(M, N, gr.GrassmannPair(pair.B + h * E, pair.At + h * F))
    gm = gr.euclid_grad(M, N, gr.GrassmannPair(pair.B - h * E, pair.At - h * F))
    HB, HA = gr.euclid_hess(M, N, pair, (E, F))
    assert np.allclose((gp[0] - gm[0]) / (2 * h), HB, atol=1e-6)
    assert np.allclose((gp[1] - gm[1]) / (2 * h), HA, atol=1e-6)


def test_tangent_projection():
    _, _, pair, rng = _setup(seed=8)
    Z = (rng.standard_normal(pair.B.shape), rng.standard_normal(pair.At.shape))
    P = gr.tangent_project(pair, Z)
    PP = gr.tangent_project(pair, P)
    assert np.allclose(P[0], PP[0], atol=1e-12) and np.allclose(P[1], PP[1], atol=1e-12)
    assert np.allclose(pair.B.T @ P[0], 0, atol=1e-12)
    assert np.allclose(pair.At.T @ P[1], 0, atol=1e-12)
    S = rng.standard_normal((2, 2))
    assert abs(np.sum(P[0] * (pair.B @ S))) < 1e-12


def test_retract_zero_and_orthonormal():
    _, _, pair, rng = _setup(seed=9)
    same = gr.retract(pair, (np.zeros_like(pair.B), np.zeros_like(pair.At)))
    assert np.allclose(same.B @ same.B.T, pair.B @ pair.B.T, atol=1e-12)
    moved = gr.retract(pair, gr.random_tangent(pair, rng))
    assert np.allclose(moved.B.T @ moved.B, np.eye(2), atol=1e-12)
    assert np.allclose(moved.At.T @ moved.At, np.eye(2), atol=1e-12)


def test_ill_conditioned_guard():
    M, N, pair, _ = _setup()
    bad = gr.GrassmannPair(pair.B, np.column_stack([pair.B[:, 0], pair.At[:, 1]]))
    with pytest.raises(IllConditionedJointMatrix):
        gr.CostContext(M, N, bad)


def test_context_invariants():
    M, N, pair, _ = _setup(seed=10)
    ctx = gr.CostContext(M, N, pair)
    assert np.allclose(ctx.X, ctx.X.T)
    assert np.allclose(ctx.X2.T, ctx.X3)
    assert np.allclose(ctx.piV @ ctx.piV, ctx.piV, atol=1e-8)
    assert np.allclose(ctx.piU @ ctx.piU, ctx.piU, atol=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 8), st.integers(0, 2**63 - 1))
def test_taylor_slopes(n, seed):
    rng = make_rng(seed)
    pair = sample(EnsembleSpec("SPD", n, seed=seed))
    j = int(rng.integers(1, n - 1))
    k = int(rng.integers(1, n - j))
    start = gr.random_pair(n, k, j, rng)
    g = gr.check_gradient(pair.M, pair.N, start, rng)
    h = gr.check_hessian(pair.M, pair.N, start, rng)
    assert 1.9 <= g["slope"] <= 2.1
    assert 2.85 <= h["slope"] <= 3.1
    assert g["residual"] <= 1e-10
    assert h["symmetry_defect"] <= 1e-8


def test_wrong_gradient_is_detected(monkeypatch):
    M, N, pair, rng = _setup(seed=12)
    orig = gr.CostContext.riemannian_grad
    monkeypatch.setattr(gr.CostContext, "riemannian_grad",
                        lambda self: tuple(0.75 * g for g in orig(self)))
    assert gr.check_gradient(M, N, pair, rng)["slope"] < 1.2


def test_trust_region_reaches_eigen_sum():
    M, N, _, rng = _setup(n=6, seed=13)
    w = np.linalg.eigvalsh(M)
    # U empty, V of dimension 3: top three eigenvalues of M
    res = gr.trust_region(M, N, gr.random_pair(6, 0, 3, rng))
    assert res.converged
    assert -res.cost == pytest.approx(w[-3:].sum(), rel=1e-9)


def test_gradient_descent_agrees_with_trust_region():
    M, N, _, rng = _setup(n=5, seed=14)
    start = gr.random_pair(5, 1, 2, rng)
    a = gr.trust_region(M, N, start)
    b = gr.gradient_descent(M, N, start, grad_tol=1e-6, max_iters=5000)
    assert -b.cost == pytest.approx(-a.cost, rel=1e-6)
