"""Exact integer-hive counting by depth-first enumeration with bound propagation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import HivePolytope, WeightTriple, assemble_polytope
from ..errors import CapExceeded, DegenerateDimension
from .simplex import OPTIMAL, solve_lp


@dataclass
class LatticeEnumeration:
    triple: WeightTriple
    count: int
    points: list | None = field(default=None, repr=False)
    nodes: int = 0


def integer_box(poly: HivePolytope, slack: int = 0):
    """Exact per-coordinate integer bounds of ``A x <= b + slack`` (``None`` if empty)."""
    A = poly.A.tolist()
    b = [int(v) + slack for v in poly.b]
    lo, hi = [], []
    for i in range(poly.dim):
        c = [0] * poly.dim
        c[i] = 1
        up = solve_lp(c, A, b)
        if up.status != OPTIMAL:
            return None
        c[i] = -1
        down = solve_lp(c, A, b)
        hi.append(math.floor(up.value))
        lo.append(math.ceil(-down.value))
    return lo, hi


def exact_lrc(triple: WeightTriple, cap: int = 10**6, order=None, keep_points: int = 10**6) -> LatticeEnumeration:
    """Count integer hives with boundary ``triple``.

    ``cap`` bounds the number of search nodes; ``order`` permutes the
    coordinate visiting order (the count must not depend on it).
    """
    if not triple.is_integer:
        raise ValueError("exact_lrc needs an integer triple")
    try:
        poly = assemble_polytope(triple)
    except DegenerateDimension:
        from ..core import build_boundary, validate_hive

        ok = validate_hive(build_boundary(triple), 0).is_hive
        return LatticeEnumeration(triple, int(ok), [()] if ok else [], 1)
    box = integer_box(poly)
    if box is None:
        return LatticeEnumeration(triple, 0, [], 0)
    lo, hi = box
    d = poly.dim
    order = list(range(d)) if order is None else list(order)
    if sorted(order) != list(range(d)):
        raise ValueError("order must be a permutation of the coordinates")
    depth_of = {v: t for t, v in enumerate(order)}
    A = poly.A
    b = [int(v) for v in poly.b]
    rows = [[(int(j), int(A[r, j])) for j in np.flatnonzero(A[r])] for r in range(len(b))]
    # rows constraining each variable, used once that variable is the deepest fixed
    by_var = [[] for _ in range(d)]
    for r, terms in enumerate(rows):
        for v, a in terms:
            by_var[v].append((r, a))

    x = [0] * d
    count = 0
    nodes = 0
    points = [] if keep_points else None

    def bound(v, t):
        low, high = lo[v], hi[v]
        for r, a in by_var[v]:
            rest = 0
            for u, au in rows[r]:
                if u == v:
                    continue
                if depth_of[u] < t:
                    rest += au * x[u]
                else:
                    rest += au * (lo[u] if au > 0 else hi[u])
            lim = b[r] - rest
            if a > 0:
                high = min(high, lim)
            else:
                low = max(low, -lim)
        return low, high

    def dfs(t):
        nonlocal count, nodes
        v = order[t]
        low, high = bound(v, t)
        for val in range(low, high + 1):
            nodes += 1
            if nodes > cap:
                raise CapExceeded(f"more than {cap} search nodes", lower_bound=count)
            x[v] = val
            if t + 1 == d:
                # all earlier rows were bounded with exact values; recheck the full point
                if all(sum(a * x[u] for u, a in rows[r]) <= b[r] for r in range(len(b))):
                    count += 1
                    if points is not None:
                        if len(points) < keep_points:
                            points.append(tuple(x))
            else:
                dfs(t + 1)

    dfs(0)
    if points is not None and len(points) < count:
        points = None
    return LatticeEnumeration(triple, count, points, nodes)
