from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from sphere.errors import DomainError

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class UnitPoint:
    """A point of the unit sphere with Cartesian and spherical coordinates.

    theta is the colatitude measured from the north pole (0, 0, 1) and lies in
    [0, pi]; phi is the azimuth in [0, 2*pi) with the seam at phi = 0.
    """

    x: float
    y: float
    z: float
    theta: float
    phi: float

    @classmethod
    def from_cartesian(cls, x: float, y: float, z: float) -> "UnitPoint":
        norm = math.sqrt(x * x + y * y + z * z)
        if abs(norm - 1.0) > UNIT_TOL:
            raise DomainError(f"({x}, {y}, {z}) is not on the unit sphere (norm {norm!r})")
        theta, phi = spherical_coordinates(np.array([x, y, z]))
        return cls(float(x), float(y), float(z), float(theta), float(phi))

    @classmethod
    def from_spherical(cls, theta: float, phi: float) -> "UnitPoint":
        if not 0.0 <= theta <= math.pi:
            raise DomainError(f"colatitude {theta} outside [0, pi]")
        phi = phi % (2.0 * math.pi)
        s = math.sin(theta)
        return cls(s * math.cos(phi), s * math.sin(phi), math.cos(theta), float(theta), float(phi))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


NORTH_POLE = UnitPoint(0.0, 0.0, 1.0, 0.0, 0.0)
SOUTH_POLE = UnitPoint(0.0, 0.0, -1.0, math.pi, 0.0)


def spherical_coordinates(xyz: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Colatitude and azimuth of unit vectors, vectorized over the last axis."""
    xyz = np.asarray(xyz, dtype=float)
    theta = np.arccos(np.clip(xyz[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(xyz[..., 1], xyz[..., 0]), 2.0 * np.pi)
    # arctan2 may return exactly 2*pi after the modulo for tiny negative angles
    phi = np.where(phi >= 2.0 * np.pi, 0.0, phi)
    return theta, phi


def euclidean_dist(a: UnitPoint, b: UnitPoint) -> float:
    """Chordal distance d(a, b) = |a - b|, in [0, 2]."""
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.z - b.z) ** 2)


def spherical_dist(a: UnitPoint, b: UnitPoint) -> float:
    """Great-circle distance D(a, b) = arccos <a, b>."""
    dot = a.x * b.x + a.y * b.y + a.z * b.z
    return math.acos(min(1.0, max(-1.0, dot)))


def chord_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise chordal distances between two (n, 3) and (m, 3) point arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def radial_project(p: Sequence[float]) -> UnitPoint:
    """r(p) = p / |p| for p in R^3 minus the origin."""
    v = np.asarray(p, dtype=float)
    if v.shape != (3,):
        raise DomainError(f"expected a point of R^3, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not math.isfinite(norm):
        raise DomainError("radial projection is undefined at the origin")
    u = v / norm
    theta, phi = spherical_coordinates(u)
    return UnitPoint(float(u[0]), float(u[1]), float(u[2]), float(theta), float(phi))


def radial_project_many(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    norms = np.linalg.norm(points, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise DomainError("radial projection is undefined at the origin")
    return points / norms


def random_unit_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """n points uniformly distributed with respect to area."""
    return radial_project_many(rng.standard_normal((n, 3)))


def to_unit_points(xyz: np.ndarray) -> list[UnitPoint]:
    xyz = np.asarray(xyz, dtype=float)
    theta, phi = spherical_coordinates(xyz)
    return [
        UnitPoint(float(p[0]), float(p[1]), float(p[2]), float(t), float(f))
        for p, t, f in zip(xyz, theta, phi)
    ]
