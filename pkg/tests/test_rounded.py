import numpy as np
import pytest

from hives.core import WeightTriple, assemble_polytope, validate_hive
from hives.errors import EmptyPolytope, StartNotInterior, UnboundedPolytope
from hives.ensembles import make_rng
from hives.lrc.oracle import exact_lrc
from hives.lrc.rounded import (
    Polyhedron,
    as_polyhedron,
    bounding_box,
    chebyshev_center,
    continuum_volume,
    hit_and_run,
    rounded_lrc,
)


def test_hit_and_run_box_mean():
    s = hit_and_run(Polyhedron.box([0, 0], [1, 1]), [0.5, 0.5], 100_000, seed=1)
    assert np.allclose(s.mean(axis=0), 0.5, rtol=0.02)
    assert np.all((s > 0) & (s < 1))


def test_hit_and_run_simplex_mean():
    s = hit_and_run(Polyhedron.simplex(2), [0.2, 0.2], 100_000, seed=2)
    assert np.allclose(s.mean(axis=0), 1 / 3, rtol=0.03)


def test_hit_and_run_rejects_boundary_start():
    with pytest.raises(StartNotInterior):
        hit_and_run(Polyhedron.box([0, 0], [1, 1]), [0.0, 0.5], 10)


def test_hit_and_run_hive_samples_feasible(t506):
    p = assemble_polytope(t506)
    c, _ = chebyshev_center(as_polyhedron(p))
    for x in hit_and_run(p, c, 2000, seed=3):
        assert validate_hive(p.embed(x), 1e-9).is_hive


def test_chebyshev_and_box():
    c, r = chebyshev_center(Polyhedron.box([0, 0], [2, 4]))
    assert r == pytest.approx(1.0)
    assert c[0] == pytest.approx(1.0)
    lo, hi = bounding_box(Polyhedron.simplex(3))
    assert np.allclose(lo, 0) and np.allclose(hi, 1)


def test_volume_errors():
    with pytest.raises(UnboundedPolytope):
        continuum_volume(Polyhedron(np.array([[-1.0, 0.0], [0.0, -1.0]]), np.zeros(2)))
    with pytest.raises(EmptyPolytope):
        continuum_volume(Polyhedron.box([0, 0], [-1, 1]))


@pytest.mark.parametrize("poly,true", [(Polyhedron.box([0, 0, 0], [1, 1, 1]), 1.0),
                                       (Polyhedron.box([0, 0], [2, 3]), 6.0),
                                       (Polyhedron.simplex(4), 1 / 24)])
def test_volume_known(poly, true):
    v = continuum_volume(poly, 0.05, seed=7)
    assert v.value == pytest.approx(true, rel=0.05)
    assert v.samples_used > 0 and v.rel_error_target == 0.05 and v.seed == 7


def test_volume_506_against_rejection(t506):
    p = assemble_polytope(t506)
    Q = as_polyhedron(p, 2.0)
    lo, hi = bounding_box(Q)
    rng = make_rng(11)
    n = 400_000
    X = lo + (hi - lo) * rng.random((n, len(lo)))
    frac = np.mean(np.all(X @ Q.A.T <= Q.b, axis=1))
    oracle = frac * np.prod(hi - lo)
    est = np.mean([continuum_volume(p, 0.02, seed=s, dilation=2.0).value for s in range(3)])
    assert est == pytest.approx(oracle, rel=0.05)


def test_volume_monotone_in_dilation(t506):
    p = assemble_polytope(t506)
    v0 = continuum_volume(p, 0.03, seed=1).value
    v1 = continuum_volume(p, 0.03, seed=1, dilation=1.0).value
    v2 = continuum_volume(p, 0.03, seed=1, dilation=2.0).value
    assert v0 < v1 < v2


def test_rounded_506(t506):
    res = rounded_lrc(t506, 0.05, seed=0)
    assert res.estimate == pytest.approx(506, rel=0.1)
    assert 0 < res.f <= 1 and res.vol_Q > 506
    assert set(res.to_dict()) >= {"estimate", "f", "vol_Q", "samples", "elapsed"}


def test_rounded_sum_triple_factor_two():
    t = WeightTriple((5, 3, 2, 1), (4, 4, 1, 0), (9, 7, 3, 1))
    assert exact_lrc(t).count == 1
    est = rounded_lrc(t, 0.05, seed=3).estimate
    assert 0.5 <= est <= 2.0


def test_rounded_infeasible_zero():
    assert rounded_lrc(WeightTriple((3, 0, 0), (3, 0, 0), (2, 2, 2))).estimate == 0


def test_rounded_consistency():
    t = WeightTriple((6, 4, 2, 0), (5, 3, 2, 0), (9, 7, 5, 1))
    exact = exact_lrc(t).count
    assert exact > 5
    est = np.mean([rounded_lrc(t, 0.05, seed=s).estimate for s in range(30)])
    assert est == pytest.approx(exact, rel=0.1)
