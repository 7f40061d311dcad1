"""Hive indexing, boundaries, rhombus inequalities and the hive polytope.

Vertices of a size-``n`` hive are addressed by ``(j, k)`` with ``j, k >= 0`` and
``j + k <= n``; the third barycentric label ``i = n - j - k`` is implicit.
``k`` runs along the bottom edge (left corner ``(0, 0)`` to right corner
``(0, n)``) and ``j`` climbs the left edge to the apex ``(n, 0)``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from numbers import Integral
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateDimension,
    IncompleteHive,
    LengthMismatch,
    NotWeaklyDecreasing,
    SaturationViolated,
)

SATURATION_TOL = 1e-9

Vertex = tuple[int, int]


def _is_int(v) -> bool:
    return isinstance(v, Integral) and not isinstance(v, bool)


def _as_weight(vec) -> tuple:
    out = []
    for v in vec:
        if _is_int(v):
            out.append(int(v))
        else:
            out.append(float(v))
    return tuple(out)


def _check_decreasing(name, vec):
    for a, b in zip(vec, vec[1:]):
        if b > a:
            raise NotWeaklyDecreasing(f"{name} is not weakly decreasing: {vec}")


def check_saturation(mu, nu, lam, tol: float = SATURATION_TOL) -> bool:
    """True iff ``sum(mu) + sum(nu) == sum(lam)``.

    Integer inputs are compared exactly. Real inputs use ``tol`` scaled by the
    magnitude of the sums (never below an absolute ``tol``).
    """
    mu, nu, lam = _as_weight(mu), _as_weight(nu), _as_weight(lam)
    if not (len(mu) == len(nu) == len(lam)):
        raise LengthMismatch(f"lengths differ: {len(mu)}, {len(nu)}, {len(lam)}")
    for name, vec in (("mu", mu), ("nu", nu), ("lambda", lam)):
        _check_decreasing(name, vec)
    lhs = sum(mu) + sum(nu)
    rhs = sum(lam)
    if all(_is_int(v) for v in mu + nu + lam):
        return lhs == rhs
    scale = max(1.0, abs(lhs), abs(rhs))
    return abs(lhs - rhs) <= tol * scale


@dataclass(frozen=True)
class WeightTriple:
    mu: tuple
    nu: tuple
    lam: tuple

    def __post_init__(self):
        object.__setattr__(self, "mu", _as_weight(self.mu))
        object.__setattr__(self, "nu", _as_weight(self.nu))
        object.__setattr__(self, "lam", _as_weight(self.lam))
        if not check_saturation(self.mu, self.nu, self.lam):
            raise SaturationViolated(
                f"sum(mu)+sum(nu)={sum(self.mu) + sum(self.nu)} != sum(lambda)={sum(self.lam)}"
            )

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def is_integer(self) -> bool:
        return all(_is_int(v) for v in self.mu + self.nu + self.lam)

    def scaled(self, m: int) -> "WeightTriple":
        return WeightTriple(
            tuple(m * v for v in self.mu),
            tuple(m * v for v in self.nu),
            tuple(m * v for v in self.lam),
        )

    def to_dict(self) -> dict:
        return {"mu": list(self.mu), "nu": list(self.nu), "lambda": list(self.lam)}


def vertices(n: int) -> list[Vertex]:
    """All vertices in row-major order (rows of constant ``j``, bottom first)."""
    return [(j, k) for j in range(n + 1) for k in range(n + 1 - j)]


def interior_vertices(n: int) -> list[Vertex]:
    return [(j, k) for j in range(1, n) for k in range(1, n - j)]


def is_boundary(n: int, v: Vertex) -> bool:
    j, k = v
    return j == 0 or k == 0 or j + k == n


def boundary_values(triple: WeightTriple) -> dict[Vertex, float]:
    """Cumulative-sum labels on the three edges."""
    mu, nu, lam, n = triple.mu, triple.nu, triple.lam, triple.n
    total_mu = sum(mu)
    vals: dict[Vertex, float] = {}
    acc = 0
    for j in range(n + 1):
        vals[(j, 0)] = acc
        if j < n:
            acc = acc + mu[j]
    acc = total_mu
    for k in range(n + 1):
        vals[(n - k, k)] = acc
        if k < n:
            acc = acc + nu[k]
    acc = 0
    for k in range(n + 1):
        # bottom edge wins at the right corner
        vals[(0, k)] = acc
        if k < n:
            acc = acc + lam[k]
    return vals


@dataclass(frozen=True)
class Hive:
    """Triangular array of labels; ``values`` may leave interior vertices unset."""

    n: int
    values: dict
    triple: WeightTriple | None = None

    @property
    def mode(self) -> str:
        return "integer" if all(_is_int(v) for v in self.values.values()) else "real"

    @property
    def is_complete(self) -> bool:
        return len(self.values) == (self.n + 1) * (self.n + 2) // 2

    def __getitem__(self, v: Vertex):
        return self.values[v]

    def with_interior(self, interior: dict) -> "Hive":
        vals = dict(self.values)
        vals.update(interior)
        return Hive(self.n, vals, self.triple)

    def interior_vector(self) -> list:
        return [self.values[v] for v in interior_vertices(self.n)]

    def as_array(self) -> np.ndarray:
        """``(n+1) x (n+1)`` float array indexed ``[j, k]``; NaN outside/unset."""
        arr = np.full((self.n + 1, self.n + 1), np.nan)
        for (j, k), val in self.values.items():
            arr[j, k] = float(val)
        return arr

    def to_json(self) -> str:
        if self.triple is None:
            raise ValueError("serialization needs the weight triple")
        if not self.is_complete:
            raise IncompleteHive("cannot serialize an incomplete hive")
        return json.dumps({"n": self.n, **self.triple.to_dict(), "interior": self.interior_vector()})

    @classmethod
    def from_json(cls, text: str) -> "Hive":
        data = json.loads(text)
        triple = WeightTriple(data["mu"], data["nu"], data["lambda"])
        if triple.n != data["n"]:
            raise LengthMismatch("n does not match weight lengths")
        h = build_boundary(triple)
        interior = interior_vertices(triple.n)
        if len(data["interior"]) != len(interior):
            raise IncompleteHive("interior vector has the wrong length")
        return h.with_interior(dict(zip(interior, data["interior"])))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["j", "k", "i", "value"])
        for j, k in vertices(self.n):
            w.writerow([j, k, self.n - j - k, self.values.get((j, k), "")])
        return buf.getvalue()


def build_boundary(triple: WeightTriple) -> Hive:
    return Hive(triple.n, boundary_values(triple), triple)


@dataclass(frozen=True)
class Rhombus:
    """Two unit triangles sharing the edge ``obtuse``; ``acute`` are the far tips.

    The hive condition is ``sum(obtuse) >= sum(acute)``.
    """

    orientation: str
    obtuse: tuple[Vertex, Vertex]
    acute: tuple[Vertex, Vertex]

    @property
    def vertices(self) -> tuple[Vertex, ...]:
        return self.obtuse + self.acute

    def defect(self, values) -> float:
        """Amount by which the inequality fails (positive = violated)."""
        (a, b), (c, d) = self.obtuse, self.acute
        return values[c] + values[d] - values[a] - values[b]


def enumerate_rhombi(n: int) -> list[Rhombus]:
    """Every minimal rhombus, one per interior edge of the triangulation.

    Orientation names follow the order right, left, vertical of the three
    inequality families; their shared edges run along ``k``, ``j`` and
    ``j - k`` respectively.
    """
    if n < 2:
        raise ValueError("a hive needs n >= 2 to contain a rhombus")

    def ok(v):
        return v[0] >= 0 and v[1] >= 0 and v[0] + v[1] <= n

    out = []
    for j, k in vertices(n):
        # shared edge (j,k)-(j,k+1)
        cand = [
            ("right", ((j, k), (j, k + 1)), ((j + 1, k), (j - 1, k + 1))),
            ("left", ((j, k), (j + 1, k)), ((j, k + 1), (j + 1, k - 1))),
            ("vertical", ((j, k + 1), (j + 1, k)), ((j, k), (j + 1, k + 1))),
        ]
        for orient, obt, acu in cand:
            if all(ok(v) for v in obt + acu):
                out.append(Rhombus(orient, obt, acu))
    return out


@dataclass
class ValidationReport:
    is_hive: bool
    deficiencies: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "is_hive": self.is_hive,
            "deficiencies": [
                {"orientation": r.orientation, "obtuse": r.obtuse, "acute": r.acute, "violation": v}
                for r, v in self.deficiencies
            ],
        }


def validate_hive(h: Hive, tolerance: float = 1e-9) -> ValidationReport:
    if not h.is_complete:
        raise IncompleteHive(f"hive of size {h.n} has {len(h.values)} labels")
    deficiencies = []
    for r in enumerate_rhombi(h.n) if h.n >= 2 else []:
        d = r.defect(h.values)
        if d > tolerance:
            deficiencies.append((r, d))
    return ValidationReport(not deficiencies, deficiencies)


@dataclass(frozen=True)
class HivePolytope:
    """Interior hive coordinates ``x`` with ``A @ x <= b``.

    Row ``r`` is the rhombus ``rhombi[r]`` with boundary labels folded into
    ``b``. Integer triples give an ``int64`` ``b``.
    """

    triple: WeightTriple
    A: np.ndarray
    b: np.ndarray
    rhombi: tuple
    coordinate_index: dict

    @property
    def dim(self) -> int:
        return len(self.coordinate_index)

    @property
    def n(self) -> int:
        return self.triple.n

    @property
    def coordinates(self) -> list[Vertex]:
        return sorted(self.coordinate_index, key=self.coordinate_index.get)

    def contains(self, x, slack=0) -> bool:
        """``A x <= b + slack`` (exact for integer data)."""
        x = np.asarray(x)
        return bool(np.all(self.A @ x <= self.b + slack))

    def embed(self, x) -> Hive:
        base = build_boundary(self.triple)
        coords = self.coordinates
        vals = [int(v) if isinstance(v, (np.integer,)) else v for v in list(x)]
        return base.with_interior(dict(zip(coords, vals)))

    def coords(self, h: Hive) -> np.ndarray:
        return np.array([h.values[v] for v in self.coordinates])


def assemble_polytope(triple: WeightTriple) -> HivePolytope:
    n = triple.n
    if n < 3:
        raise DegenerateDimension(f"n={n} leaves no interior coordinates")
    bnd = boundary_values(triple)
    index = {v: i for i, v in enumerate(interior_vertices(n))}
    rhombi = enumerate_rhombi(n)
    A = np.zeros((len(rhombi), len(index)), dtype=np.int64)
    b = []
    for r, rh in enumerate(rhombi):
        const = 0
        for sign, verts in ((-1, rh.obtuse), (1, rh.acute)):
            for v in verts:
                if v in index:
                    A[r, index[v]] += sign
                else:
                    const -= sign * bnd[v]
        b.append(const)
    nnz = np.count_nonzero(A, axis=1)
    assert np.all(nnz <= 4) and np.all(np.abs(A) <= 1)
    assert np.all(nnz >= 1), "every rhombus touches the interior for n >= 3"
    b = np.array(b, dtype=np.int64 if triple.is_integer else float)
    return HivePolytope(triple, A, b, tuple(rhombi), index)


def parse_weights(text: str | Sequence) -> tuple:
    """Parse ``"40,30,20"`` (or a sequence) into a weight tuple."""
    if isinstance(text, str):
        parts = [p for p in text.replace(" ", ",").split(",") if p]
        vals = []
        for p in parts:
            try:
                vals.append(int(p))
            except ValueError:
                vals.append(float(p))
        return tuple(vals)
    return tuple(text)
