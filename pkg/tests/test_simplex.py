from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from hives.lrc.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, is_feasible, solve_lp


def test_small_optimum_exact():
    # max x + y  s.t. 2x + y <= 4, x + 3y <= 5, x, y >= 0
    res = solve_lp([1, 1], [[2, 1], [1, 3], [-1, 0], [0, -1]], [4, 5, 0, 0])
    assert res.status == OPTIMAL
    assert res.x == [Fraction(7, 5), Fraction(6, 5)]
    assert res.value == Fraction(13, 5)


def test_free_variables_negative_optimum():
    res = solve_lp([-1], [[-1]], [3])  # x >= -3, maximize -x
    assert res.status == OPTIMAL and res.x == [Fraction(-3)]


def test_infeasible_and_unbounded():
    assert solve_lp([1], [[1], [-1]], [1, -2]).status == INFEASIBLE
    assert solve_lp([1], [[-1]], [0]).status == UNBOUNDED
    assert not is_feasible([[1], [-1]], [1, -2])
    assert is_feasible([[1], [-1]], [2, -2])


def test_degenerate_vertex_terminates():
    # many constraints through the optimum; Bland's rule must not cycle
    A = [[1, 0], [0, 1], [1, 1], [2, 1], [1, 2], [-1, 0], [0, -1]]
    b = [1, 1, 2, 3, 3, 0, 0]
    res = solve_lp([1, 1], A, b)
    assert res.status == OPTIMAL and res.value == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_agrees_with_highs(d, m, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-3, 4, (m, d))
    b = rng.integers(-4, 8, m)
    c = rng.integers(-3, 4, d)
    # box keeps most instances bounded
    A = np.vstack([A, np.eye(d, dtype=int), -np.eye(d, dtype=int)])
    b = np.concatenate([b, np.full(d, 10), np.full(d, 10)])
    ours = solve_lp(c.tolist(), A.tolist(), b.tolist())
    ref = linprog(-c, A_ub=A, b_ub=b, bounds=[(None, None)] * d, method="highs")
    if ref.status == 2:
        assert ours.status == INFEASIBLE
    else:
        assert ours.status == OPTIMAL
        assert float(ours.value) == pytest.approx(-ref.fun, abs=1e-7)
        assert np.all(A @ np.array([float(v) for v in ours.x]) <= b + 1e-12)
