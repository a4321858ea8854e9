"""Icosahedral triangulation T_N of S^2 with 20 N^2 faces.

Vertex order is canonical: the 12 icosahedron corners, then the N-1 interior
lattice points of each of the 30 edges (edges sorted by corner indices, points
ordered from the lower corner), then the interior points of each of the 20
faces. Shared vertices are identified combinatorially through lattice
coordinates, never by comparing floating point positions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, List, Tuple

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from sphere.base import radial_project_many
from sphere.constants import DIAMETER_CONSTANT, MIN_ANGLE
from sphere.errors import ParameterError

logger = logging.getLogger(__name__)

_T = (1.0 + math.sqrt(5.0)) / 2.0

# cyclic permutations of (0, +-1, +-golden)
_CORNERS = radial_project_many(
    np.array(
        [
            (-1, _T, 0),
            (1, _T, 0),
            (-1, -_T, 0),
            (1, -_T, 0),
            (0, -1, _T),
            (0, 1, _T),
            (0, -1, -_T),
            (0, 1, -_T),
            (_T, 0, -1),
            (_T, 0, 1),
            (-_T, 0, -1),
            (-_T, 0, 1),
        ],
        dtype=float,
    )
)

_FACES: Tuple[Tuple[int, int, int], ...] = (
    (0, 11, 5),
    (0, 5, 1),
    (0, 1, 7),
    (0, 7, 10),
    (0, 10, 11),
    (1, 5, 9),
    (5, 11, 4),
    (11, 10, 2),
    (10, 7, 6),
    (7, 1, 8),
    (3, 9, 4),
    (3, 4, 2),
    (3, 2, 6),
    (3, 6, 8),
    (3, 8, 9),
    (4, 9, 5),
    (2, 4, 11),
    (6, 2, 10),
    (8, 6, 7),
    (9, 8, 1),
)

_EDGES: Tuple[Tuple[int, int], ...] = tuple(
    sorted({tuple(sorted((f[a], f[b]))) for f in _FACES for a, b in ((0, 1), (1, 2), (2, 0))})  # type: ignore[misc]
)


@dataclass(frozen=True, eq=False)
class IcosaTriangulation:
    N: int
    vertices: np.ndarray  # (10N^2 + 2, 3) unit vectors
    faces: np.ndarray  # (20N^2, 3) vertex indices

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted (E, 2) pairs."""
        pairs = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        return np.unique(np.sort(pairs, axis=1), axis=0)

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        e = self.edges
        n = self.vertex_count
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = sparse.coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
        return adj.tocsr().sorted_indices()

    @cached_property
    def vertex_neighbors(self) -> List[np.ndarray]:
        adj = self.adjacency
        return [adj.indices[adj.indptr[v] : adj.indptr[v + 1]] for v in range(self.vertex_count)]

    @cached_property
    def incidence(self) -> sparse.csr_matrix:
        """Vertex-by-face incidence; row v lists the star of v."""
        f = self.face_count
        rows = self.faces.ravel()
        cols = np.repeat(np.arange(f), 3)
        inc = sparse.coo_matrix((np.ones(3 * f, dtype=np.int8), (rows, cols)), shape=(self.vertex_count, f))
        return inc.tocsr().sorted_indices()

    def neighbors(self, v: int) -> np.ndarray:
        adj = self.adjacency
        return adj.indices[adj.indptr[v] : adj.indptr[v + 1]]

    def star(self, v: int) -> np.ndarray:
        inc = self.incidence
        return inc.indices[inc.indptr[v] : inc.indptr[v + 1]]

    @cached_property
    def star_table(self) -> np.ndarray:
        """(V, 6) incident faces per vertex; degree-5 rows repeat their first face."""
        inc = self.incidence
        counts = np.diff(inc.indptr)
        table = np.empty((self.vertex_count, 6), dtype=np.int64)
        for slot in range(6):
            pick = inc.indptr[:-1] + np.where(slot < counts, slot, 0)
            table[:, slot] = inc.indices[pick]
        return table

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    @cached_property
    def kdtree(self) -> cKDTree:
        return cKDTree(self.vertices)


def _edge_points(u: int, v: int, N: int, edge_base: Dict[Tuple[int, int], int]) -> np.ndarray:
    """Global indices of the lattice points strictly inside edge u->v, ordered away from u."""
    t = np.arange(1, N)
    if u < v:
        return edge_base[(u, v)] + t - 1
    return edge_base[(v, u)] + (N - t) - 1


@lru_cache(maxsize=4)
def build_triangulation(N: int) -> IcosaTriangulation:
    """Subdivide each icosahedron face into N^2 triangles and project radially."""
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    V = 10 * N * N + 2
    vertices = np.empty((V, 3))
    vertices[:12] = _CORNERS

    per_edge = N - 1
    edge_base: Dict[Tuple[int, int], int] = {}
    t = np.arange(1, N, dtype=float)[:, None]
    for e, (u, v) in enumerate(_EDGES):
        base = 12 + e * per_edge
        edge_base[(u, v)] = base
        if per_edge:
            vertices[base : base + per_edge] = radial_project_many(
                ((N - t) * _CORNERS[u] + t * _CORNERS[v]) / N
            )

    per_face = (N - 1) * (N - 2) // 2
    face_base = 12 + len(_EDGES) * per_edge
    b_idx, c_idx = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
    interior = (b_idx >= 1) & (c_idx >= 1) & (b_idx + c_idx <= N - 1)
    up = b_idx + c_idx <= N - 1
    down = b_idx + c_idx <= N - 2
    ub, uc = b_idx[up], c_idx[up]
    db, dc = b_idx[down], c_idx[down]
    ib, ic = b_idx[interior], c_idx[interior]

    faces = []
    for f, (A, B, C) in enumerate(_FACES):
        # grid[b, c] is the lattice point (a A + b B + c C) / N with a = N - b - c
        grid = np.full((N + 1, N + 1), -1, dtype=np.int64)
        grid[0, 0], grid[N, 0], grid[0, N] = A, B, C
        if per_edge:
            s = np.arange(1, N)
            grid[s, 0] = _edge_points(A, B, N, edge_base)
            grid[0, s] = _edge_points(A, C, N, edge_base)
            grid[N - s, s] = _edge_points(B, C, N, edge_base)
        if per_face:
            start = face_base + f * per_face
            grid[ib, ic] = np.arange(start, start + per_face)
            a = (N - ib - ic)[:, None]
            pts = (a * _CORNERS[A] + ib[:, None] * _CORNERS[B] + ic[:, None] * _CORNERS[C]) / N
            vertices[start : start + per_face] = radial_project_many(pts)
        faces.append(np.stack([grid[ub, uc], grid[ub + 1, uc], grid[ub, uc + 1]], axis=1))
        faces.append(np.stack([grid[db + 1, dc], grid[db + 1, dc + 1], grid[db, dc + 1]], axis=1))

    tri = IcosaTriangulation(N, vertices, np.concatenate(faces))
    tri.vertices.setflags(write=False)
    tri.faces.setflags(write=False)
    logger.debug("triangulation N=%d: %d vertices, %d faces", N, V, tri.face_count)
    return tri


def _face_corners(tri: IcosaTriangulation, chunk: slice) -> np.ndarray:
    return tri.vertices[tri.faces[chunk]]


def max_curvilinear_diameter(
    tri: IcosaTriangulation, samples_per_edge: int = 4, chunk_size: int = 4096
) -> float:
    """Largest sampled Euclidean diameter over the projected triangles r(sigma)."""
    s = np.linspace(0.0, 1.0, samples_per_edge + 2)[1:-1][None, :, None]
    best = 0.0
    for start in range(0, tri.face_count, chunk_size):
        P = _face_corners(tri, slice(start, start + chunk_size))
        pieces = [P]
        for a, b in ((0, 1), (1, 2), (2, 0)):
            seg = (1.0 - s) * P[:, a, None, :] + s * P[:, b, None, :]
            pieces.append(radial_project_many(seg))
        pts = np.concatenate(pieces, axis=1)
        diff = pts[:, :, None, :] - pts[:, None, :, :]
        best = max(best, float(np.sqrt(np.einsum("fijk,fijk->fij", diff, diff).max())))
    return best


def planar_angles(tri: IcosaTriangulation) -> np.ndarray:
    """(F, 3) interior angles of the planar triangles spanned by the projected vertices."""
    P = tri.vertices[tri.faces]
    angles = np.empty((tri.face_count, 3))
    for corner in range(3):
        u = P[:, (corner + 1) % 3] - P[:, corner]
        w = P[:, (corner + 2) % 3] - P[:, corner]
        cos = np.einsum("fk,fk->f", u, w) / (np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
        angles[:, corner] = np.arccos(np.clip(cos, -1.0, 1.0))
    return angles


def min_planar_angle(tri: IcosaTriangulation) -> float:
    return float(planar_angles(tri).min())


def min_plane_distance(tri: IcosaTriangulation) -> float:
    """Smallest distance from the origin to the plane of a face; positive means no plane hits 0."""
    P = tri.vertices[tri.faces]
    normal = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
    normal /= np.linalg.norm(normal, axis=1, keepdims=True)
    return float(np.abs(np.einsum("fk,fk->f", normal, P[:, 0])).min())


def diameter_bound(N: int) -> float:
    return DIAMETER_CONSTANT / N


def lipschitz_factor(theta: float = MIN_ANGLE) -> float:
    """pi / (2 sin(theta / 2)); at the guaranteed minimal angle this is pi (13 + 6 sqrt 5) / 11."""
    return math.pi / (2.0 * math.sin(theta / 2.0))
