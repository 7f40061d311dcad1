"""Lattice volume estimation by coordinate hit-and-run on integer hives.

Levels are the contracted polytopes ``P(xi) = {x : A x <= b + xi}`` for
integers ``xi <= 0``. A walk on one level moves one coordinate at a time to a
uniform value on its exact integer flex interval, so every visited point is an
integer hive of that level and nothing is ever rejected.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..core import HivePolytope, assemble_polytope
from ..ensembles import make_rng
from ..errors import DegenerateDimension, InfeasibleLP, InfeasiblePoint, NonIntegralOptimum
from .simplex import OPTIMAL, solve_lp

Z95 = 1.959963984540054


def max_lp_hive(triple_or_poly, level: int = 0) -> tuple:
    """Integer hive maximizing the sum of interior labels, solved exactly."""
    poly = _poly(triple_or_poly)
    b = [int(v) + level for v in poly.b]
    res = solve_lp([1] * poly.dim, poly.A.tolist(), b)
    if res.status != OPTIMAL:
        raise InfeasibleLP(f"no hive at level {level}")
    if any(v.denominator != 1 for v in res.x):
        raise NonIntegralOptimum(f"LP optimum {res.x} is not integral")
    return tuple(int(v) for v in res.x)


def _poly(obj) -> HivePolytope:
    if isinstance(obj, HivePolytope):
        return obj
    if not obj.is_integer:
        raise ValueError("lattice estimation needs an integer triple")
    return assemble_polytope(obj)


@dataclass(frozen=True)
class ContractionSchedule:
    xi_star: int
    xi_tilde: int
    levels: tuple  # outermost (0) first
    depth: object = None  # exact max uniform slack t*


def contraction_schedule(triple_or_poly) -> ContractionSchedule:
    """First LP-infeasible contraction and the level ladder used for ratios.

    ``max t  s.t.  A x + t <= b`` gives the deepest feasible contraction
    ``-t*``; ``xi_star`` is the first integer below it. The ladder runs from 0
    in steps of 2 and ends at ``xi_tilde`` with a final step of 1 when
    ``xi_tilde`` is odd.
    """
    poly = _poly(triple_or_poly)
    A = [row + [1] for row in poly.A.tolist()]
    c = [0] * poly.dim + [1]
    res = solve_lp(c, A, [int(v) for v in poly.b])
    if res.status != OPTIMAL:
        raise InfeasibleLP("hive polytope is empty")
    t_star = res.x[-1]
    if t_star < 0:
        raise InfeasibleLP("hive polytope is empty")
    xi_star = math.ceil(-t_star) - 1
    xi_tilde = min(0, xi_star + 2)
    levels = list(range(0, xi_tilde - 1, -2))
    if levels[-1] != xi_tilde:
        levels.append(xi_tilde)
    return ContractionSchedule(xi_star, xi_tilde, tuple(levels), t_star)


@dataclass(frozen=True)
class FlexInterval:
    coordinate: int
    lo: int
    hi: int

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    @property
    def size(self) -> int:
        return max(0, self.hi - self.lo + 1)


class LatticeWalker:
    """Coordinate hit-and-run state on one level, with incrementally kept slacks."""

    def __init__(self, poly: HivePolytope, level: int = 0):
        self.poly = poly
        self.level = int(level)
        A = poly.A
        self.b = [int(v) + self.level for v in poly.b]
        self.rows_of = [[(int(r), int(A[r, c])) for r in np.flatnonzero(A[:, c])] for c in range(poly.dim)]
        self.terms = [[(int(c), int(A[r, c])) for c in np.flatnonzero(A[r])] for r in range(A.shape[0])]
        self.x = None
        self.slack = None

    def reset(self, x):
        x = [int(v) for v in x]
        slack = [self.b[r] - sum(a * x[c] for c, a in self.terms[r]) for r in range(len(self.b))]
        if min(slack) < 0:
            raise InfeasiblePoint(f"point violates level {self.level}")
        self.x, self.slack = x, slack

    def flex(self, c: int) -> FlexInterval:
        """Integer range for coordinate ``c`` with the others held fixed."""
        up = down = None
        s = self.slack
        for r, a in self.rows_of[c]:
            if a > 0:
                up = s[r] if up is None else min(up, s[r])
            else:
                down = s[r] if down is None else min(down, s[r])
        xc = self.x[c]
        return FlexInterval(c, xc - down, xc + up)

    def set(self, c: int, value: int):
        delta = value - self.x[c]
        if delta:
            s = self.slack
            for r, a in self.rows_of[c]:
                s[r] -= a * delta
            self.x[c] = value

    def min_slack(self) -> int:
        return min(self.slack)


def flex(poly: HivePolytope, x, coordinate: int, level: int = 0) -> FlexInterval:
    w = LatticeWalker(poly, level)
    w.reset(x)
    return w.flex(coordinate)


def char_walk(poly: HivePolytope, start, steps: int, seed: int = 0, level: int = 0, rng=None):
    """Yield ``steps`` lattice points of a coordinate hit-and-run on ``level``.

    The first move uses the first coordinate (in index order) that has flex;
    afterwards coordinates are uniform over all interior indices. A tight start
    yields only itself.
    """
    rng = rng if rng is not None else make_rng(seed)
    w = LatticeWalker(poly, level)
    w.reset(start)
    d = poly.dim
    first = next((c for c in range(d) if w.flex(c).size > 1), None)
    if first is None:
        yield tuple(w.x)
        return
    c = first
    for _ in range(steps):
        f = w.flex(c)
        w.set(c, int(rng.integers(f.lo, f.hi + 1)))
        yield tuple(w.x)
        c = int(rng.integers(d))


def is_tight(poly: HivePolytope, x, level: int = 0) -> bool:
    w = LatticeWalker(poly, level)
    w.reset(x)
    return all(w.flex(c).size == 1 for c in range(poly.dim))


def default_stall(dim: int, count: int) -> int:
    return 50 * dim * (count + 1)


@dataclass
class Accumulation:
    count: int
    points: set = field(repr=False)
    steps: int = 0
    tight: bool = False


def unique_accumulate(poly: HivePolytope, start, seed: int = 0, stall_threshold=None, level: int = 0,
                      seeds=(), rng=None, max_steps: int = 10**8) -> Accumulation:
    """Distinct points visited until ``stall_threshold`` steps bring nothing new.

    ``stall_threshold`` is an int or a callable ``(dim, count) -> int``
    (default ``50 * dim * (count + 1)``). Extra ``seeds`` (known points of the
    level) are counted and used as uniformly chosen restart points.
    """
    rng = rng if rng is not None else make_rng(seed)
    d = poly.dim
    threshold = stall_threshold if stall_threshold is not None else default_stall
    limit = threshold if callable(threshold) else (lambda _d, _c, t=int(threshold): t)
    w = LatticeWalker(poly, level)
    w.reset(start)
    seen = {tuple(w.x)}
    for s in seeds:
        seen.add(tuple(int(v) for v in s))
    pool = list(seen)
    first = next((c for c in range(d) if w.flex(c).size > 1), None)
    if first is None and len(pool) == 1:
        return Accumulation(1, seen, 0, True)
    if first is None:
        w.reset(pool[int(rng.integers(len(pool)))])
        first = int(rng.integers(d))
    c = first
    quiet = 0
    steps = 0
    while quiet < limit(d, len(seen)) and steps < max_steps:
        f = w.flex(c)
        w.set(c, int(rng.integers(f.lo, f.hi + 1)))
        steps += 1
        p = tuple(w.x)
        if p in seen:
            quiet += 1
        else:
            seen.add(p)
            quiet = 0
        c = int(rng.integers(d))
    return Accumulation(len(seen), seen, steps, False)


def alignment_probe(poly: HivePolytope, points, level: int = 0, limit: int = 5000) -> list:
    """Feasible integer points one two-coordinate move away that CHAR never saw.

    Nonempty output means the walk stalled while lattice points it cannot reach
    along coordinate axes remain nearby.
    """
    pts = list(points)[:limit]
    seen = set(points)
    A = poly.A
    b = poly.b + level
    d = poly.dim
    found = set()
    moves = []
    for a in range(d):
        for c in range(a + 1, d):
            for sa in (-1, 1):
                for sc in (-1, 1):
                    v = np.zeros(d, dtype=np.int64)
                    v[a], v[c] = sa, sc
                    moves.append(v)
    for p in pts:
        base = np.array(p, dtype=np.int64)
        for v in moves:
            q = base + v
            t = tuple(int(u) for u in q)
            if t not in seen and t not in found and np.all(A @ q <= b):
                found.add(t)
    return sorted(found)


@dataclass
class RatioEstimate:
    outer: int
    inner: int
    hits: int
    total: int

    @property
    def fraction(self) -> float:
        return self.hits / self.total if self.total else float("nan")

    @property
    def ratio(self) -> float:
        """Outer over inner lattice volume (at least 1 by containment)."""
        return self.total / self.hits if self.hits else float("inf")

    def rel_halfwidth(self) -> float:
        if not self.hits:
            return float("inf")
        p = self.fraction
        return Z95 * math.sqrt(max(1 - p, 0.0) / (p * self.total))

    def to_dict(self) -> dict:
        return {"outer": self.outer, "inner": self.inner, "hits": self.hits, "total": self.total,
                "ratio": self.ratio}


def _sample_level(poly, level, starts, rng, needed_fn, thin, burn, max_samples, stash):
    """Walk ``level`` from random ``starts`` until ``needed_fn(samples)`` is False.

    Every thinned sample goes to ``stash(point, min_slack)``.
    """
    w = LatticeWalker(poly, level)
    d = poly.dim
    total = 0
    chain_len = max(200, 20 * thin)
    while needed_fn(total) and total < max_samples:
        w.reset(starts[int(rng.integers(len(starts)))])
        for _ in range(burn):
            c = int(rng.integers(d))
            f = w.flex(c)
            w.set(c, int(rng.integers(f.lo, f.hi + 1)))
        for _ in range(chain_len):
            for _ in range(thin):
                c = int(rng.integers(d))
                f = w.flex(c)
                w.set(c, int(rng.integers(f.lo, f.hi + 1)))
            stash(tuple(w.x), w.min_slack())
            total += 1
    return total


@dataclass
class LatticeResult:
    estimate: float
    schedule: ContractionSchedule | None
    ratios: list
    inner_count: int
    stalled_flag: bool
    branch: str
    elapsed: float = 0.0
    unreached: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        s = self.schedule
        return {
            "estimate": self.estimate,
            "xi_star": s.xi_star if s else None,
            "xi_tilde": s.xi_tilde if s else None,
            "levels": list(s.levels) if s else [],
            "ratios": [r.to_dict() for r in self.ratios],
            "inner_count": self.inner_count,
            "stalled_flag": self.stalled_flag,
            "branch": self.branch,
            "elapsed": self.elapsed,
        }


def lattice_lrc(triple, rel_error: float = 0.05, seed: int = 0, stall_threshold=None,
                max_samples: int = 2_000_000) -> LatticeResult:
    """Telescoping lattice-volume estimate of the number of integer hives.

    Branch A (``xi_tilde == 0``) counts the hive directly by unique
    accumulation. Branch B walks each level from the outside in, counting how
    many thinned samples fall in the next level; those hits seed (and count
    toward) the next ratio, which is topped up by fresh walks only as far as
    its relative 95% half-width ``rel_error / sqrt(#ratios)`` demands. The
    innermost level is counted by unique accumulation from the saved hits.
    """
    t0 = time.perf_counter()
    rng = make_rng(seed)
    try:
        poly = _poly(triple)
    except DegenerateDimension:
        from ..core import build_boundary, validate_hive

        ok = validate_hive(build_boundary(triple), 0).is_hive
        return LatticeResult(float(ok), None, [], int(ok), False, "degenerate", time.perf_counter() - t0)
    try:
        start = max_lp_hive(poly)
        sched = contraction_schedule(poly)
    except InfeasibleLP:
        return LatticeResult(0.0, None, [], 0, False, "infeasible", time.perf_counter() - t0)
    d = poly.dim
    if sched.xi_tilde == 0:
        acc = unique_accumulate(poly, start, stall_threshold=stall_threshold, rng=rng)
        missed = alignment_probe(poly, acc.points)
        return LatticeResult(float(acc.count), sched, [], acc.count, bool(missed), "A",
                             time.perf_counter() - t0, missed)

    levels = sched.levels
    n_ratios = len(levels) - 1
    target = rel_error / math.sqrt(n_ratios)
    thin = d
    burn = 10 * d
    ratios = []
    carried: list = []  # thinned samples already known to lie in the current outer level
    starts = [start]
    for outer, inner in zip(levels, levels[1:]):
        # carried slacks are measured against level ``outer``
        hits = [p for p, s in carried if s >= outer - inner]
        tally = {"total": len(carried), "hits": len(hits)}
        new_hits = list(hits)
        next_carried = [(p, s - (outer - inner)) for p, s in carried if s >= outer - inner]

        def stash(p, s, _t=tally, _h=new_hits, _nc=next_carried, _gap=outer - inner):
            _t["total"] += 1
            if s >= _gap:
                _t["hits"] += 1
                _h.append(p)
                _nc.append((p, s - _gap))

        def needed(_total, _t=tally):
            r = RatioEstimate(outer, inner, _t["hits"], _t["total"])
            return _t["total"] < 100 or r.rel_halfwidth() > target

        _sample_level(poly, outer, starts, rng, needed, thin, burn, max_samples, stash)
        ratios.append(RatioEstimate(outer, inner, tally["hits"], tally["total"]))
        if not new_hits:
            break
        starts = new_hits
        carried = next_carried

    if not ratios or ratios[-1].hits == 0:
        return LatticeResult(float("nan"), sched, ratios, 0, True, "B", time.perf_counter() - t0)
    inner_level = levels[-1]
    seeds = sorted(set(starts))
    acc = unique_accumulate(poly, seeds[int(rng.integers(len(seeds)))], stall_threshold=stall_threshold,
                            level=inner_level, seeds=seeds, rng=rng)
    missed = alignment_probe(poly, acc.points, level=inner_level)
    est = float(acc.count)
    for r in ratios:
        est *= r.ratio
    return LatticeResult(est, sched, ratios, acc.count, bool(missed), "B", time.perf_counter() - t0, missed)
