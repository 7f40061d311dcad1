import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hives.core import WeightTriple, assemble_polytope, validate_hive
from hives.errors import InfeasibleLP, InfeasiblePoint
from hives.lrc.lattice import (
    RatioEstimate,
    alignment_probe,
    char_walk,
    contraction_schedule,
    default_stall,
    flex,
    is_tight,
    lattice_lrc,
    max_lp_hive,
    unique_accumulate,
)
from hives.lrc.oracle import exact_lrc

TIGHT = WeightTriple((3, 1, 0, 0), (2, 2, 1, 0), (5, 3, 1, 0))


def test_max_lp_examples(t3):
    assert max_lp_hive(t3) == (5,)
    p = assemble_polytope(TIGHT)
    (only,) = exact_lrc(TIGHT).points
    assert max_lp_hive(p) == only
    with pytest.raises(InfeasibleLP):
        max_lp_hive(WeightTriple((3, 0, 0), (3, 0, 0), (2, 2, 2)))


def test_max_lp_is_componentwise_maximum(t506):
    for m in (1, 2):
        t = t506.scaled(m)
        pts = np.array(exact_lrc(t).points)
        assert max_lp_hive(t) == tuple(int(v) for v in pts.max(axis=0))


def test_flex_examples(t3):
    p = assemble_polytope(t3)
    f = flex(p, [4], 0)
    assert (f.lo, f.hi, f.size) == (4, 5, 2)
    assert (flex(p, [5], 0).lo, flex(p, [5], 0).hi) == (4, 5)
    with pytest.raises(InfeasiblePoint):
        flex(p, [6], 0)


def test_flex_is_exact(t506):
    p = assemble_polytope(t506)
    rng = np.random.default_rng(1)
    pts = exact_lrc(t506).points
    for idx in rng.choice(len(pts), 30, replace=False):
        x = list(pts[idx])
        for c in range(p.dim):
            f = flex(p, x, c)
            for v, inside in ((f.lo, True), (f.hi, True), (f.lo - 1, False), (f.hi + 1, False)):
                y = list(x)
                y[c] = v
                assert p.contains(y) == inside


def test_tight_hive():
    p = assemble_polytope(TIGHT)
    x = max_lp_hive(p)
    assert is_tight(p, x)
    assert all(flex(p, x, c).size == 1 for c in range(p.dim))
    assert list(char_walk(p, x, 100, seed=0)) == [x]
    acc = unique_accumulate(p, x, seed=0)
    assert acc.count == 1 and acc.tight


def test_char_walk_n3(t3):
    p = assemble_polytope(t3)
    assert set(char_walk(p, [4], 500, seed=2)) == {(4,), (5,)}


def test_char_walk_feasible(t506):
    p = assemble_polytope(t506)
    for x in char_walk(p, max_lp_hive(p), 2000, seed=3):
        assert validate_hive(p.embed(x), 0).is_hive


def test_char_walk_first_move_scans_index_order(t506):
    p = assemble_polytope(t506)
    x = max_lp_hive(p)
    first = next(c for c in range(p.dim) if flex(p, x, c).size > 1)
    step = next(char_walk(p, x, 1, seed=4))
    assert all(step[c] == x[c] for c in range(p.dim) if c != first)


def test_unique_accumulate_small(t3):
    p = assemble_polytope(t3)
    assert unique_accumulate(p, [5], seed=0).count == 2


def test_unique_accumulate_506(t506):
    p = assemble_polytope(t506)
    acc = unique_accumulate(p, max_lp_hive(p), seed=0)
    assert acc.count in (505, 506)
    assert acc.count <= 506
    if acc.count == 505:
        assert alignment_probe(p, acc.points)


def test_stall_threshold_scaling():
    assert default_stall(3, 0) == 150
    assert default_stall(3, 9) == 1500


def test_schedule_examples(t3, t506):
    s = contraction_schedule(t3)
    assert (s.xi_star, s.xi_tilde, s.levels) == (-1, 0, (0,))
    s = contraction_schedule(t506)
    assert s.xi_star == -6 and s.xi_tilde == -4 and s.levels == (0, -2, -4)
    s = contraction_schedule(t506.scaled(2))
    assert s.xi_tilde == -9 and s.levels[-2:] == (-8, -9)


def test_schedule_levels_feasible_and_xi_star_infeasible(t506):
    p = assemble_polytope(t506.scaled(2))
    s = contraction_schedule(p)
    for lv in s.levels:
        max_lp_hive(p, lv)
    with pytest.raises(InfeasibleLP):
        max_lp_hive(p, s.xi_star)


def test_nesting_on_samples(t506):
    p = assemble_polytope(t506)
    for x in char_walk(p, max_lp_hive(p, -4), 500, seed=5, level=-4):
        assert p.contains(x, -4) and p.contains(x, -2) and p.contains(x, 0)


def test_ratio_estimate():
    r = RatioEstimate(0, -2, 25, 100)
    assert r.fraction == 0.25 and r.ratio == 4.0
    assert r.to_dict()["ratio"] == 4.0
    assert RatioEstimate(0, -2, 0, 10).ratio == float("inf")


def test_lattice_branch_a(t3):
    res = lattice_lrc(t3, seed=0)
    assert res.branch == "A" and res.estimate == 2


def test_lattice_infeasible_zero():
    assert lattice_lrc(WeightTriple((3, 0, 0), (3, 0, 0), (2, 2, 2))).estimate == 0


def test_lattice_506(t506):
    res = lattice_lrc(t506, rel_error=0.05, seed=1)
    assert res.branch == "B"
    assert abs(res.estimate / 506 - 1) < 0.1
    assert all(r.ratio >= 1 for r in res.ratios)
    d = res.to_dict()
    assert {"estimate", "xi_star", "levels", "ratios", "inner_count", "stalled_flag", "elapsed"} <= set(d)


@st.composite
def triples(draw):
    n = draw(st.integers(3, 4))
    part = st.lists(st.integers(0, 5), min_size=n, max_size=n).map(lambda v: tuple(sorted(v, reverse=True)))
    mu, nu = draw(part), draw(part)
    lam = sorted((a + b for a, b in zip(mu, nu)), reverse=True)
    for _ in range(draw(st.integers(0, 4))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if lam[j] > 0:
            lam[i] += 1
            lam[j] -= 1
        lam.sort(reverse=True)
    return WeightTriple(mu, nu, tuple(lam))


@settings(max_examples=30, deadline=None)
@given(triples(), st.integers(0, 1000))
def test_accumulate_lower_bound(t, seed):
    ex = exact_lrc(t)
    if ex.count == 0:
        return
    p = assemble_polytope(t)
    acc = unique_accumulate(p, max_lp_hive(p), seed=seed)
    assert acc.count <= ex.count
    assert acc.points <= set(ex.points)


@settings(max_examples=30, deadline=None)
@given(triples())
def test_max_lp_componentwise_max_small(t):
    ex = exact_lrc(t)
    if ex.count == 0:
        with pytest.raises(InfeasibleLP):
            max_lp_hive(t)
        return
    assert max_lp_hive(t) == tuple(int(v) for v in np.array(ex.points).max(axis=0))
