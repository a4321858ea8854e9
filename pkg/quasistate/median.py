"""Z-median quasi-state: marking, COUNT, median selection and the certified bound."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Any, Dict, Tuple

import numpy as np

from field.pl import ScalarField, sample
from field.reeb import ReebTree, build_reeb, superlevel_component_indicator
from sphere.base import spherical_coordinates
from sphere.constants import DIAMETER_CONSTANT, K_RATIO, MIN_K, MIN_N, PARTITION_TERM
from sphere.errors import InvariantViolation, ParameterError, ResourceLimitError, SpectrumError
from sphere.functions import InputFunction
from sphere.icosa import IcosaTriangulation, build_triangulation
from sphere.partition import TWO_PI, EqualAreaPartition, build_partition

logger = logging.getLogger(__name__)

# T_N at this size already holds ~22.5M vertices
MAX_PRACTICAL_N = 1500
# parameter search gives up reporting a required N past this
SEARCH_CEILING = 2**40
SPECTRUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MarkedVertexSet:
    marks: np.ndarray  # per-vertex c_v
    region_flags: np.ndarray  # per-region f_R
    Z: np.ndarray  # marked vertex of each region, in flat region order

    @property
    def marked_count(self) -> int:
        return int(self.marks.sum())


@dataclass(frozen=True)
class QuasiStateResult:
    value: float
    error_bound: float
    N: int
    k: int
    lip_bound: float
    median_node: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def k_for_N(N: int) -> int:
    """Largest odd k with k <= 0.115744 N^2."""
    k = math.floor(K_RATIO * N * N)
    return k if k % 2 else k - 1


def validate_parameters(N: int, k: int) -> None:
    if N < MIN_N:
        raise ParameterError(f"N must be >= {MIN_N}, got {N}")
    if k < MIN_K or k % 2 == 0:
        raise ParameterError(f"k must be an odd integer >= {MIN_K}, got {k}")
    if k > K_RATIO * N * N:
        raise ParameterError(f"k={k} exceeds {K_RATIO} * N^2 = {K_RATIO * N * N:.3f} for N={N}")


def error_bound(lip_bound: float, N: int, k: int) -> float:
    """Certified |zeta(f) - zeta_Z(F)| bound, split into its triangulation and partition terms."""
    return lip_bound * (DIAMETER_CONSTANT / N + PARTITION_TERM / math.sqrt(k))


def aggregated_constant(N: int) -> float:
    """C with error_bound(lip, N, k(N)) == lip * C / N."""
    return N * error_bound(1.0, N, k_for_N(N))


def select_parameters(epsilon: float, lip_bound: float, max_N: int = MAX_PRACTICAL_N) -> Tuple[int, int]:
    """Smallest N >= 46 whose bound at k = k(N) is within epsilon."""
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    if not lip_bound >= 0:
        raise ParameterError(f"lip_bound must be >= 0, got {lip_bound}")

    def fits(N: int) -> bool:
        return error_bound(lip_bound, N, k_for_N(N)) <= epsilon

    if fits(MIN_N):
        return MIN_N, k_for_N(MIN_N)
    lo, hi = MIN_N, 2 * MIN_N
    while not fits(hi):
        if hi > SEARCH_CEILING:
            raise ResourceLimitError(f"epsilon={epsilon} needs N > {SEARCH_CEILING}")
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            hi = mid
        else:
            lo = mid
    if hi > max_N:
        raise ResourceLimitError(f"epsilon={epsilon} requires N={hi}, above the practical limit {max_N}")
    return hi, k_for_N(hi)


def _region_bounds(partition: EqualAreaPartition) -> Tuple[np.ndarray, ...]:
    band = np.repeat(np.arange(partition.band_count), partition.sector_counts)
    m = partition.sector_counts[band]
    sector = np.arange(partition.k) - partition.band_offsets[band]
    lat = partition.band_latitudes
    return lat[band], lat[band + 1], TWO_PI * sector / m, TWO_PI * (sector + 1) / m


def region_centers(partition: EqualAreaPartition) -> np.ndarray:
    """Unit vectors at the (theta, phi) midpoint of every region, in flat order."""
    t0, t1, p0, p1 = _region_bounds(partition)
    theta, phi = (t0 + t1) / 2, (p0 + p1) / 2
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1)


def mark_vertices(tri: IcosaTriangulation, partition: EqualAreaPartition) -> MarkedVertexSet:
    """Mark, for each region, the interior vertex nearest to the region's center.

    Distance ties go to the lower vertex index. The chosen vertex lies within one
    triangle diameter of the center.
    """
    theta, phi = spherical_coordinates(tri.vertices)
    region = partition.locate_many(theta, phi)
    t0, t1, p0, p1 = (b[region] for b in _region_bounds(partition))
    interior = (t0 < theta) & (theta < t1) & (p0 < phi) & (phi < p1)

    candidates = np.flatnonzero(interior)
    owner = region[candidates]
    dist = np.linalg.norm(tri.vertices[candidates] - region_centers(partition)[owner], axis=1)
    ranked = candidates[np.lexsort((candidates, dist, owner))]
    regions, first = np.unique(region[ranked], return_index=True)
    flags = np.zeros(partition.k, dtype=bool)
    flags[regions] = True
    if not flags.all():
        missing = np.flatnonzero(~flags)
        raise InvariantViolation(
            f"{len(missing)} regions of k={partition.k} hold no interior vertex of T_{tri.N}, "
            f"first {partition.region_at(int(missing[0]))}"
        )
    Z = ranked[first]
    marks = np.zeros(tri.vertex_count, dtype=bool)
    marks[Z] = True
    return MarkedVertexSet(marks, flags, Z)


def count_pass(tree: ReebTree, marks: np.ndarray) -> np.ndarray:
    """t_v: marked vertices in the subtree of v."""
    return tree.accumulate(np.asarray(marks, dtype=np.int64))


def find_median(tree: ReebTree, counts: np.ndarray, k: int) -> int:
    """Deepest node whose count reaches (k + 1) / 2."""
    heavy = np.flatnonzero(counts >= (k + 1) // 2)
    if len(heavy) == 0:
        raise InvariantViolation(f"no node carries {(k + 1) // 2} of {k} marks")
    deepest = heavy[tree.depth[heavy] == tree.depth[heavy].max()]
    if len(deepest) != 1:
        raise InvariantViolation(f"{len(deepest)} median candidates at depth {tree.depth[deepest[0]]}")
    return int(deepest[0])


def check_spectrum(tree: ReebTree, subtree_mass: np.ndarray, tol: float = SPECTRUM_TOL) -> None:
    """Reject measures splitting the tree into two halves of mass 1/2."""
    nonroot = tree.parent >= 0
    halves = np.flatnonzero(nonroot & (np.abs(subtree_mass - 0.5) <= tol))
    if len(halves):
        raise SpectrumError(f"subtree of node {int(halves[0])} carries mass {subtree_mass[halves[0]]!r}")


def weighted_median(tree: ReebTree, masses: np.ndarray) -> int:
    """Node whose removal leaves components of mass <= 1/2 each, for a node-supported measure."""
    masses = np.asarray(masses, dtype=float)
    if masses.shape != (tree.node_count,):
        raise ParameterError(f"expected {tree.node_count} node masses, got shape {masses.shape}")
    if np.any(masses < 0) or not math.isclose(masses.sum(), 1.0, abs_tol=1e-12):
        raise ParameterError("node masses must be non-negative and sum to 1")
    sub = tree.accumulate(masses)
    check_spectrum(tree, sub)
    heavy = np.flatnonzero(sub > 0.5)
    return int(heavy[np.argmax(tree.depth[heavy])])


def integral_oracle(field: ScalarField, tree: ReebTree, median_node: int) -> float:
    """min F plus the integral of the superlevel indicator over [min F, max F]."""
    levels = np.unique(field.values)
    steps = [
        float(b - a) * superlevel_component_indicator(tree, field, float(b), median_node)
        for a, b in zip(levels[:-1], levels[1:])
    ]
    return float(levels[0]) + math.fsum(steps)


class MedianSolver:
    """Partition, triangulation and marks for one (N, k), reused across fields."""

    def __init__(self, N: int, k: int) -> None:
        validate_parameters(N, k)
        self.N = N
        self.k = k

    @cached_property
    def partition(self) -> EqualAreaPartition:
        return build_partition(self.k)

    @cached_property
    def tri(self) -> IcosaTriangulation:
        return build_triangulation(self.N)

    @cached_property
    def marked(self) -> MarkedVertexSet:
        started = time.perf_counter()
        marked = mark_vertices(self.tri, self.partition)
        logger.debug("marked %d vertices in %.1f ms", marked.marked_count, 1000 * (time.perf_counter() - started))
        return marked

    def sample(self, f: InputFunction) -> ScalarField:
        return sample(f, self.tri)

    def median_of_field(self, field: ScalarField) -> Tuple[ReebTree, int]:
        if field.tri.N != self.N:
            raise ParameterError(f"field lives on T_{field.tri.N}, solver on T_{self.N}")
        tree = build_reeb(field)
        counts = count_pass(tree, self.marked.marks)
        if counts[tree.root] != self.k:
            raise InvariantViolation(f"root count {counts[tree.root]} != k={self.k}")
        return tree, find_median(tree, counts, self.k)

    def compute(self, f: InputFunction) -> QuasiStateResult:
        lip = f.lip_bound
        if lip is None:
            raise ParameterError(f"{f.kind} input needs an explicit Lipschitz bound")
        field = self.sample(f)
        _, node = self.median_of_field(field)
        result = QuasiStateResult(
            value=float(field.values[node]),
            error_bound=error_bound(float(lip), self.N, self.k),
            N=self.N,
            k=self.k,
            lip_bound=float(lip),
            median_node=node,
        )
        logger.info("zeta_Z(F) = %.12g +- %.6g (N=%d, k=%d)", result.value, result.error_bound, self.N, self.k)
        return result


def median_of_field(field: ScalarField, k: int) -> Tuple[ReebTree, int]:
    return MedianSolver(field.tri.N, k).median_of_field(field)


def compute(f: InputFunction, N: int, k: int) -> QuasiStateResult:
    """Full pipeline: partition, triangulation, sampling, Reeb tree, marking, COUNT, median."""
    return MedianSolver(N, k).compute(f)


def compute_for_epsilon(f: InputFunction, epsilon: float) -> QuasiStateResult:
    lip = f.lip_bound
    if lip is None:
        raise ParameterError(f"{f.kind} input needs an explicit Lipschitz bound")
    N, k = select_parameters(epsilon, float(lip))
    return compute(f, N, k)
