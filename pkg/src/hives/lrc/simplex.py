"""Two-phase tableau simplex over the rationals.

Solves ``max c.x`` subject to ``A x <= b`` with free ``x``. Every quantity is a
:class:`fractions.Fraction`, so the optimum vertex is exact. Bland's rule
prevents cycling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    x: list | None = None
    value: Fraction | None = None


def _pivot(rows, obj, r, c):
    prow = rows[r]
    piv = prow[c]
    if piv != 1:
        rows[r] = prow = [v / piv for v in prow]
    for i, row in enumerate(rows):
        if i != r:
            f = row[c]
            if f:
                rows[i] = [a - f * b for a, b in zip(row, prow)]
    f = obj[c]
    if f:
        obj[:] = [a - f * b for a, b in zip(obj, prow)]


def _run(rows, obj, basis, allowed):
    """Iterate to optimality; ``obj`` holds reduced costs ``z_j - c_j``."""
    while True:
        enter = next((j for j in allowed if obj[j] < 0), None)
        if enter is None:
            return OPTIMAL
        best = None
        for i, row in enumerate(rows):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return UNBOUNDED
        r = best[1]
        _pivot(rows, obj, r, enter)
        basis[r] = enter


def solve_lp(c, A, b) -> LPResult:
    """Maximize ``c.x`` subject to ``A x <= b`` exactly."""
    c = [Fraction(v) for v in c]
    A = [[Fraction(int(v)) if float(v).is_integer() else Fraction(v) for v in row] for row in A]
    b = [Fraction(v) if not isinstance(v, Fraction) else v for v in b]
    m, d = len(A), len(c)
    if m == 0:
        return LPResult(OPTIMAL, [Fraction(0)] * d, Fraction(0)) if not any(c) else LPResult(UNBOUNDED)
    n_art = sum(1 for v in b if v < 0)
    width = 2 * d + m + n_art
    rows, basis = [], []
    art_cols = []
    a_col = 2 * d + m
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        row = [Fraction(0)] * (width + 1)
        for j in range(d):
            row[j] = sign * A[i][j]
            row[d + j] = -sign * A[i][j]
        row[2 * d + i] = Fraction(sign)
        row[-1] = sign * b[i]
        if sign < 0:
            row[a_col] = Fraction(1)
            basis.append(a_col)
            art_cols.append(a_col)
            a_col += 1
        else:
            basis.append(2 * d + i)
        rows.append(row)

    if art_cols:
        # phase 1: maximize -sum(artificials)
        obj = [Fraction(0)] * (width + 1)
        for i, row in enumerate(rows):
            if basis[i] in art_cols:
                obj = [o - v for o, v in zip(obj, row)]
        for col in art_cols:
            obj[col] = Fraction(0)
        _run(rows, obj, basis, range(width))
        if obj[-1] < 0:
            return LPResult(INFEASIBLE)
        art = set(art_cols)
        for i in range(len(rows) - 1, -1, -1):
            if basis[i] in art:
                col = next((j for j in range(2 * d + m) if rows[i][j] != 0), None)
                if col is None:
                    del rows[i], basis[i]
                else:
                    _pivot(rows, obj, i, col)
                    basis[i] = col
        keep = 2 * d + m
        rows = [row[:keep] + [row[-1]] for row in rows]
        width = keep

    cost = c + [-v for v in c] + [Fraction(0)] * m
    obj = [-v for v in cost] + [Fraction(0)]
    for i, row in enumerate(rows):
        cb = cost[basis[i]]
        if cb:
            obj = [o + cb * v for o, v in zip(obj, row)]
    status = _run(rows, obj, basis, range(width))
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    vals = [Fraction(0)] * width
    for i, bi in enumerate(basis):
        vals[bi] = rows[i][-1]
    x = [vals[j] - vals[d + j] for j in range(d)]
    return LPResult(OPTIMAL, x, obj[-1])


def is_feasible(A, b) -> bool:
    return solve_lp([0] * (len(A[0]) if len(A) else 0), A, b).status == OPTIMAL
