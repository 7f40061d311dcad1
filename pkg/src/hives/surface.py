"""Planar placement, triangulation and discrete curvature of hive surfaces.

Gaussian curvature is the angle deficit over the mixed Voronoi area; mean
curvature is half the cotangent Laplacian of the position, signed positive when
it points against the upward (``+z``) normal, so a concave hive (a cap) has
positive mean curvature. Boundary vertices carry zero curvature.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .core import Hive, is_boundary, vertices
from .errors import DegenerateTriangle, EmptyList, MixedSizes

SQRT3_2 = np.sqrt(3.0) / 2.0


def placement(n: int) -> np.ndarray:
    """``(j, k) -> k (1, 0) + j (1/2, sqrt(3)/2)`` in :func:`vertices` order."""
    if n < 1:
        raise ValueError("placement needs n >= 1")
    vs = np.array(vertices(n), dtype=float)
    return np.column_stack([vs[:, 1] + 0.5 * vs[:, 0], SQRT3_2 * vs[:, 0]])


@dataclass(frozen=True)
class HiveSurface:
    n: int
    positions: np.ndarray
    heights: np.ndarray
    triangles: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.positions, self.heights])

    @property
    def boundary_mask(self) -> np.ndarray:
        return np.array([is_boundary(self.n, v) for v in vertices(self.n)])


def triangulate(positions: np.ndarray) -> np.ndarray:
    return np.sort(Delaunay(positions).simplices, axis=1)


def surface_from_heights(n: int, heights, positions=None) -> HiveSurface:
    pos = placement(n) if positions is None else np.asarray(positions, dtype=float)
    return HiveSurface(n, pos, np.asarray(heights, dtype=float), triangulate(pos))


def hive_surface(h: Hive) -> HiveSurface:
    return surface_from_heights(h.n, [float(h.values[v]) for v in vertices(h.n)])


def mean_surface(hives) -> HiveSurface:
    hives = list(hives)
    if not hives:
        raise EmptyList("mean_surface needs at least one hive")
    n = hives[0].n
    if any(h.n != n for h in hives):
        raise MixedSizes("all hives must share the same size")
    heights = np.mean([[float(h.values[v]) for v in vertices(n)] for h in hives], axis=0)
    return surface_from_heights(n, heights)


@dataclass(frozen=True)
class CurvatureField:
    gaussian: np.ndarray
    mean: np.ndarray


def _cot(a, b):
    cross = np.linalg.norm(np.cross(a, b))
    return np.dot(a, b) / cross


def curvature(surface: HiveSurface) -> CurvatureField:
    P = surface.points
    nv = len(P)
    angle_sum = np.zeros(nv)
    area = np.zeros(nv)
    lap = np.zeros((nv, 3))
    normal = np.zeros((nv, 3))
    for tri in surface.triangles:
        idx = list(tri)
        p = P[idx]
        fn = np.cross(p[1] - p[0], p[2] - p[0])
        A = 0.5 * np.linalg.norm(fn)
        if A <= 1e-300:
            raise DegenerateTriangle(f"triangle {idx} has zero area")
        if fn[2] < 0:
            fn = -fn
        angles = []
        cots = []
        for c in range(3):
            u = p[(c + 1) % 3] - p[c]
            w = p[(c + 2) % 3] - p[c]
            angles.append(np.arctan2(np.linalg.norm(np.cross(u, w)), np.dot(u, w)))
            cots.append(_cot(u, w))
        obtuse = [a > np.pi / 2 for a in angles]
        for c in range(3):
            i, a, b = idx[c], idx[(c + 1) % 3], idx[(c + 2) % 3]
            angle_sum[i] += angles[c]
            normal[i] += fn
            # edge i-a is opposite corner b, edge i-b opposite corner a
            cot_a, cot_b = cots[(c + 1) % 3], cots[(c + 2) % 3]
            lap[i] += cot_b * (P[a] - P[i]) + cot_a * (P[b] - P[i])
            if not any(obtuse):
                e_a = np.sum((P[a] - P[i]) ** 2)
                e_b = np.sum((P[b] - P[i]) ** 2)
                area[i] += (cot_b * e_a + cot_a * e_b) / 8.0
            elif obtuse[c]:
                area[i] += A / 2.0
            else:
                area[i] += A / 4.0
    bnd = surface.boundary_mask
    K = np.zeros(nv)
    H = np.zeros(nv)
    inner = ~bnd
    K[inner] = (2 * np.pi - angle_sum[inner]) / area[inner]
    # mean-curvature normal: lap / (2 area) = -2 H n
    hn = lap[inner] / (2.0 * area[inner][:, None])
    nrm = normal[inner] / np.linalg.norm(normal[inner], axis=1)[:, None]
    H[inner] = -0.5 * np.einsum("ij,ij->i", hn, nrm)
    return CurvatureField(K, H)


def ensemble_curvature(hives, mode: str = "ensemble") -> CurvatureField:
    """Average curvature over hives.

    ``mode="ensemble"`` averages per-hive fields; ``mode="mean-surface"``
    takes the curvature of the averaged surface.
    """
    hives = list(hives)
    if mode == "mean-surface":
        return curvature(mean_surface(hives))
    if mode != "ensemble":
        raise ValueError(f"unknown mode {mode!r}")
    if not hives:
        raise EmptyList("no hives")
    fields = [curvature(hive_surface(h)) for h in hives]
    return CurvatureField(
        np.mean([f.gaussian for f in fields], axis=0), np.mean([f.mean for f in fields], axis=0)
    )


def surface_csv(surface: HiveSurface, field: CurvatureField | None = None) -> str:
    """Rows ``j, k, x, y, height, K, H`` in vertex order."""
    field = field or curvature(surface)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["j", "k", "x", "y", "height", "K", "H"])
    for i, (j, k) in enumerate(vertices(surface.n)):
        x, y = surface.positions[i]
        w.writerow([j, k, repr(float(x)), repr(float(y)), repr(float(surface.heights[i])),
                    repr(float(field.gaussian[i])), repr(float(field.mean[i]))])
    return buf.getvalue()
