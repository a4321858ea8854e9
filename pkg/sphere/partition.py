"""Equal-area partition of S^2 into latitude bands of azimuthal sectors.

Band 0 is the north polar cap [0, theta_0], bands 1..n are the interior bands
[theta_{i-1}, theta_i], and band n+1 is the south polar cap [theta_n, pi].
Regions are half-open rectangles [theta_{i-1}, theta_i) x [2pi(j-1)/m_i, 2pi j/m_i)
in spherical coordinates; the last band is closed at pi.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Tuple

import numpy as np
from scipy.spatial.distance import cdist, pdist

from sphere.base import UnitPoint
from sphere.constants import INRADIUS_CONSTANT, MIN_K, PARTITION_DIAMETER, POLAR_SECTORS
from sphere.errors import InvariantViolation, ParameterError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
LOCATE_WINDOW = 3
EDGE_SAMPLES = 32


@dataclass(frozen=True)
class RegionId:
    band: int
    sector: int  # 1-based


@dataclass(frozen=True, eq=False)
class EqualAreaPartition:
    k: int
    n: int
    # theta_{-1} = 0, theta_0, ..., theta_n, theta_{n+1} = pi; theta_b is stored at index b + 1
    band_latitudes: np.ndarray
    # theta'_0, ..., theta'_n, an arithmetic progression from theta_0 to pi - theta_0
    approx_latitudes: np.ndarray
    sector_counts: np.ndarray

    @property
    def band_count(self) -> int:
        return self.n + 2

    @property
    def latitude_step(self) -> float:
        return float(self.approx_latitudes[1] - self.approx_latitudes[0])

    @cached_property
    def band_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sector_counts)[:-1]])

    def _check(self, rid: RegionId) -> None:
        if not 0 <= rid.band <= self.n + 1:
            raise ParameterError(f"band {rid.band} outside [0, {self.n + 1}]")
        if not 1 <= rid.sector <= int(self.sector_counts[rid.band]):
            raise ParameterError(
                f"sector {rid.sector} outside [1, {int(self.sector_counts[rid.band])}] in band {rid.band}"
            )

    def region_bounds(self, rid: RegionId) -> Tuple[float, float, float, float]:
        """(theta_lo, theta_hi, phi_lo, phi_hi) of a region."""
        self._check(rid)
        m = int(self.sector_counts[rid.band])
        return (
            float(self.band_latitudes[rid.band]),
            float(self.band_latitudes[rid.band + 1]),
            TWO_PI * (rid.sector - 1) / m,
            TWO_PI * rid.sector / m,
        )

    def region_center(self, rid: RegionId) -> UnitPoint:
        t0, t1, p0, p1 = self.region_bounds(rid)
        return UnitPoint.from_spherical(0.5 * (t0 + t1), 0.5 * (p0 + p1))

    def flat_index(self, rid: RegionId) -> int:
        self._check(rid)
        return int(self.band_offsets[rid.band]) + rid.sector - 1

    def region_at(self, index: int) -> RegionId:
        if not 0 <= index < self.k:
            raise ParameterError(f"region index {index} outside [0, {self.k})")
        band = int(np.searchsorted(self.band_offsets, index, side="right")) - 1
        return RegionId(band, index - int(self.band_offsets[band]) + 1)

    def regions(self) -> Iterator[RegionId]:
        for band, m in enumerate(self.sector_counts):
            for sector in range(1, int(m) + 1):
                yield RegionId(band, sector)

    def contains(self, rid: RegionId, p: UnitPoint) -> bool:
        t0, t1, p0, p1 = self.region_bounds(rid)
        last_band = rid.band == self.n + 1
        in_theta = t0 <= p.theta < t1 or (last_band and p.theta == t1)
        return in_theta and p0 <= p.phi < p1

    def _band_of(self, theta: float) -> int:
        lat = self.band_latitudes
        if theta < lat[1]:
            return 0
        if theta >= lat[self.n + 1]:
            return self.n + 1
        guess = int((theta - self.approx_latitudes[0]) / self.latitude_step) + 1
        lo = max(1, guess - LOCATE_WINDOW)
        hi = min(self.n, guess + LOCATE_WINDOW)
        for b in range(lo, hi + 1):
            if lat[b] <= theta < lat[b + 1]:
                return b
        logger.warning(
            "theta=%.17g not within %d bands of approximate band %d (k=%d); widening search",
            theta,
            LOCATE_WINDOW,
            guess,
            self.k,
        )
        for b in range(1, self.n + 1):
            if lat[b] <= theta < lat[b + 1]:
                return b
        raise InvariantViolation(f"no band contains theta={theta!r}")

    def locate(self, p: UnitPoint) -> RegionId:
        """Region containing p, in constant time."""
        band = self._band_of(p.theta)
        m = int(self.sector_counts[band])
        sector = min(int(p.phi * m / TWO_PI), m - 1) + 1
        return RegionId(band, sector)

    def locate_many(self, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """Flat region indices of many points, same half-open convention as locate."""
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        band = np.clip(np.searchsorted(self.band_latitudes, theta, side="right") - 1, 0, self.n + 1)
        m = self.sector_counts[band]
        sector = np.minimum((phi * m / TWO_PI).astype(np.int64), m - 1)
        return self.band_offsets[band] + sector

    def latitude_deviation(self) -> float:
        """max_i |theta_i - theta'_i| * sqrt(k), the measured band-correction constant."""
        exact = self.band_latitudes[1 : self.n + 2]
        return float(np.max(np.abs(exact - self.approx_latitudes)) * math.sqrt(self.k))


def build_partition(k: int) -> EqualAreaPartition:
    """Subdivide S^2 into k regions of area 4*pi/k arranged in latitude bands."""
    if k < MIN_K or k % 2 == 0:
        raise ParameterError(f"k must be an odd integer >= {MIN_K}, got {k}")
    # isqrt(k // 2) == floor(sqrt(k / 2)) for odd k
    n = math.isqrt(k // 2)
    if n % 2 == 0:
        n -= 1

    cos0 = 1.0 - 2.0 * POLAR_SECTORS / k
    theta0 = math.acos(cos0)
    approx = theta0 + (math.pi - 2.0 * theta0) * np.arange(n + 1) / n

    # band i (1..n) between theta'_{i-1} and theta'_i should hold (k/2)(cos - cos) regions
    cos_approx = np.cos(approx)
    ideal = 0.5 * k * (cos_approx[:-1] - cos_approx[1:])
    counts = np.floor(ideal).astype(np.int64)
    missing = k - 2 * POLAR_SECTORS - int(counts.sum())
    if missing:
        order = np.argsort(-(ideal - counts), kind="stable")
        counts[order[:missing]] += 1
    if np.any(counts < 1):
        raise InvariantViolation(f"empty band while partitioning k={k}")

    cos_exact = cos0 - (2.0 / k) * np.cumsum(counts)
    cos_exact[-1] = -cos0
    latitudes = np.concatenate([[0.0, theta0], np.arccos(np.clip(cos_exact, -1.0, 1.0)), [math.pi]])
    latitudes[n + 1] = math.pi - theta0

    sector_counts = np.concatenate([[POLAR_SECTORS], counts, [POLAR_SECTORS]])
    partition = EqualAreaPartition(k, n, latitudes, approx, sector_counts)
    logger.debug("partition k=%d: n=%d, sectors per band %s", k, n, sector_counts.tolist())
    return partition


def region_area(partition: EqualAreaPartition, rid: RegionId) -> float:
    t0, t1, _, _ = partition.region_bounds(rid)
    return TWO_PI * (math.cos(t0) - math.cos(t1)) / int(partition.sector_counts[rid.band])


def _to_xyz(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    s = np.sin(theta)
    return np.stack([s * np.cos(phi), s * np.sin(phi), np.cos(theta)], axis=-1)


def _boundary_samples(t0: float, t1: float, p0: float, p1: float, per_edge: int) -> np.ndarray:
    """Corners plus per_edge interior samples on each of the four edges."""
    ts = np.linspace(t0, t1, per_edge + 2)
    ps = np.linspace(p0, p1, per_edge + 2)
    theta = np.concatenate([np.full_like(ps, t0), np.full_like(ps, t1), ts, ts])
    phi = np.concatenate([ps, ps, np.full_like(ts, p0), np.full_like(ts, p1)])
    return _to_xyz(theta, phi)


def _per_band(partition: EqualAreaPartition, values: list[float]) -> np.ndarray:
    # sectors of one band differ by a rotation about the z axis
    return np.repeat(np.asarray(values), partition.sector_counts)


def region_diameters(partition: EqualAreaPartition, per_edge: int = EDGE_SAMPLES) -> np.ndarray:
    """Sampled Euclidean diameter of every region, in flat region order."""
    per_band = []
    for band in range(partition.band_count):
        bounds = partition.region_bounds(RegionId(band, 1))
        per_band.append(float(pdist(_boundary_samples(*bounds, per_edge)).max()))
    return _per_band(partition, per_band)


def region_inradii(partition: EqualAreaPartition, per_edge: int = EDGE_SAMPLES) -> np.ndarray:
    """Euclidean distance from each region's spherical-coordinate center to its sampled boundary."""
    per_band = []
    for band in range(partition.band_count):
        rid = RegionId(band, 1)
        center = partition.region_center(rid).as_array()[None, :]
        boundary = _boundary_samples(*partition.region_bounds(rid), per_edge)
        per_band.append(float(cdist(center, boundary).min()))
    return _per_band(partition, per_band)


def region_diameter_audit(partition: EqualAreaPartition, per_edge: int = EDGE_SAMPLES) -> float:
    return float(region_diameters(partition, per_edge).max())


def region_inradius_audit(partition: EqualAreaPartition, per_edge: int = EDGE_SAMPLES) -> float:
    return float(region_inradii(partition, per_edge).min())


def diameter_bound(k: int) -> float:
    return PARTITION_DIAMETER / math.sqrt(k)


def inradius_bound(k: int) -> float:
    return INRADIUS_CONSTANT / math.sqrt(k)


def locate_by_scan(partition: EqualAreaPartition, p: UnitPoint) -> RegionId:
    """Linear scan over every region; the reference for locate."""
    hits = [rid for rid in partition.regions() if partition.contains(rid, p)]
    if len(hits) != 1:
        raise InvariantViolation(f"{len(hits)} regions contain theta={p.theta!r}, phi={p.phi!r}")
    return hits[0]
