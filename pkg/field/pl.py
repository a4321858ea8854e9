"""Piecewise-linear approximation F of an input function on T_N."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from sphere.base import UnitPoint, radial_project_many
from sphere.constants import DIAMETER_CONSTANT, PL_LIP_FACTOR
from sphere.errors import InvariantViolation, ParameterError, SamplingError
from sphere.functions import InputFunction
from sphere.icosa import IcosaTriangulation

logger = logging.getLogger(__name__)

BARY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Vertex values of F with the strict total order (value, vertex index).

    Ties are never perturbed numerically; the index breaks them, which keeps
    every output deterministic.
    """

    tri: IcosaTriangulation
    values: np.ndarray

    @cached_property
    def order(self) -> np.ndarray:
        """Vertices sorted ascending by (value, index)."""
        return np.lexsort((np.arange(len(self.values)), self.values))

    @cached_property
    def rank(self) -> np.ndarray:
        rank = np.empty(len(self.values), dtype=np.int64)
        rank[self.order] = np.arange(len(self.values))
        return rank

    def precedes(self, u: int, v: int) -> bool:
        return (self.values[u], u) < (self.values[v], v)

    @property
    def min_vertex(self) -> int:
        return int(self.order[0])

    @property
    def max_vertex(self) -> int:
        return int(self.order[-1])

    def affine(self, a: float, b: float) -> "ScalarField":
        return ScalarField(self.tri, a * self.values + b)

    def locate_faces(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Containing face and barycentric weights of each point of S^2."""
        points = radial_project_many(np.atleast_2d(points))
        tri = self.tri
        _, nearest = tri.kdtree.query(points)
        candidates = tri.star_table[nearest]
        corners = tri.vertices[tri.faces[candidates]]  # (P, 6, 3 corners, 3 coords)
        rhs = np.broadcast_to(points[:, None, :, None], candidates.shape + (3, 1))
        w = np.linalg.solve(np.swapaxes(corners, -1, -2), rhs)[..., 0]
        ok = np.all(w >= -BARY_TOL, axis=-1) & (w.sum(axis=-1) > 0)
        slot = np.argmax(ok, axis=1)
        rows = np.arange(len(points))
        faces = candidates[rows, slot]
        weights = w[rows, slot]
        for p in np.flatnonzero(~ok.any(axis=1)):
            faces[p], weights[p] = self._walk(points[p], int(nearest[p]))
        weights = weights / weights.sum(axis=1, keepdims=True)
        return faces, weights

    def _walk(self, point: np.ndarray, start: int) -> Tuple[int, np.ndarray]:
        tri = self.tri
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for face in tri.star(v):
                w = np.linalg.solve(tri.vertices[tri.faces[face]].T, point)
                if np.all(w >= -BARY_TOL) and w.sum() > 0:
                    return int(face), w
            for u in tri.neighbors(v):
                if int(u) not in seen:
                    seen.add(int(u))
                    queue.append(int(u))
        raise InvariantViolation(f"no face of T_{tri.N} contains {point}")

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """F at arbitrary points: barycentric interpolation composed with radial projection."""
        faces, weights = self.locate_faces(points)
        return np.einsum("pk,pk->p", weights, self.values[self.tri.faces[faces]])

    def evaluate_at(self, p: UnitPoint) -> float:
        return float(self.evaluate_many(p.as_array()[None, :])[0])


def sample(f: InputFunction, tri: IcosaTriangulation) -> ScalarField:
    """F with F(v) = f(v) at every vertex of the triangulation."""
    try:
        values = np.asarray(f.evaluate_vertices(tri), dtype=float)
    except SamplingError:
        raise
    except Exception as e:
        raise _first_failure(f, tri, e) from e
    if values.shape != (tri.vertex_count,):
        raise ParameterError(f"expected {tri.vertex_count} vertex values, got shape {values.shape}")
    bad = np.flatnonzero(~np.isfinite(values))
    if len(bad):
        raise SamplingError(int(bad[0]), f"non-finite value {values[bad[0]]!r}")
    values.setflags(write=False)
    return ScalarField(tri, values)


def _first_failure(f: InputFunction, tri: IcosaTriangulation, cause: Exception) -> SamplingError:
    from sphere.base import to_unit_points

    for v, p in enumerate(to_unit_points(tri.vertices)):
        try:
            f.evaluate(p)
        except Exception as e:
            return SamplingError(v, str(e))
    return SamplingError(-1, f"bulk evaluation failed: {cause}")


def _require_lip(f: InputFunction) -> float:
    lip = f.lip_bound
    if lip is None:
        raise ParameterError(f"a Lipschitz bound is required for {f.kind} input")
    return float(lip)


def pl_sup_error_bound(f: InputFunction, field: ScalarField) -> float:
    """Certified bound on sup |f - F|."""
    return _require_lip(f) * DIAMETER_CONSTANT / field.tri.N


def pl_lip_bound(f: InputFunction) -> float:
    """Certified bound on the Lipschitz constant of F."""
    return _require_lip(f) * PL_LIP_FACTOR
