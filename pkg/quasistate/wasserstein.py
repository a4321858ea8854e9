"""W-infinity and W1 distances between finitely supported measures on S^2.

The ground metric is the chordal distance d(x, y) = |x - y|, the metric in
which the triangulation and partition diameters are measured.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.flow import edmonds_karp
from scipy import sparse
from scipy.optimize import linprog

from field.pl import ScalarField, pl_lip_bound, sample
from field.reeb import ReebTree, build_reeb
from quasistate.median import weighted_median
from sphere.base import UnitPoint, chord_matrix, radial_project_many, spherical_coordinates, to_unit_points
from sphere.errors import InvariantViolation, ParameterError, ResourceLimitError
from sphere.functions import InputFunction, Monomial, Polynomial
from sphere.icosa import IcosaTriangulation, build_triangulation
from sphere.partition import EqualAreaPartition

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12
FLOW_TOL = 1e-9
MAX_W1_SUPPORT = 10_000
MAX_ENLARGEMENT_ATOMS = 16
ODD_PRIMES = (101, 103, 107, 109, 113, 127, 131, 137, 139, 149)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """sum_i w_i delta_{x_i} with distinct unit-vector atoms and positive weights."""

    points: np.ndarray  # (n, 3)
    weights: np.ndarray  # (n,)
    vertices: Optional[np.ndarray] = None  # triangulation vertex of each atom, if any

    def __post_init__(self) -> None:
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if points.ndim != 2 or points.shape[1] != 3 or len(points) != len(weights) or len(points) == 0:
            raise ParameterError(f"atoms {points.shape} and weights {weights.shape} do not match")
        if np.any(np.abs(np.linalg.norm(points, axis=1) - 1.0) > 1e-9):
            raise ParameterError("measure atoms must lie on the unit sphere")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > WEIGHT_TOL * max(1, len(weights)):
            raise ParameterError(f"weights must be positive and sum to 1, got sum {weights.sum()!r}")
        if len(np.unique(points, axis=0)) != len(points):
            raise ParameterError("measure atoms must be distinct")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights / weights.sum())

    @classmethod
    def dirac(cls, p: UnitPoint) -> "DiscreteMeasure":
        return cls(p.as_array()[None, :], np.ones(1))

    @classmethod
    def uniform(cls, points: np.ndarray) -> "DiscreteMeasure":
        points = np.atleast_2d(points)
        return cls(points, np.full(len(points), 1.0 / len(points)))

    @classmethod
    def on_vertices(
        cls, tri: IcosaTriangulation, vertices: Sequence[int], weights: Sequence[float]
    ) -> "DiscreteMeasure":
        vertices = np.asarray(vertices, dtype=np.int64)
        return cls(tri.vertices[vertices], np.asarray(weights, dtype=float), vertices)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def atoms(self) -> List[Tuple[UnitPoint, float]]:
        return list(zip(to_unit_points(self.points), self.weights.tolist()))

    def node_masses(self, node_count: int) -> np.ndarray:
        """Weights spread onto triangulation vertices, for the weighted median."""
        if self.vertices is None:
            raise ParameterError("measure is not supported on triangulation vertices")
        masses = np.zeros(node_count)
        np.add.at(masses, self.vertices, self.weights)
        return masses

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def _coupling_feasible(mu: DiscreteMeasure, nu: DiscreteMeasure, allowed: np.ndarray) -> bool:
    """Whether some coupling of mu and nu is supported on the allowed pairs."""
    graph = nx.DiGraph()
    for i, w in enumerate(mu.weights):
        graph.add_edge("source", ("mu", i), capacity=float(w))
    for j, w in enumerate(nu.weights):
        graph.add_edge(("nu", j), "sink", capacity=float(w))
    for i, j in zip(*np.nonzero(allowed)):
        # no capacity attribute: unbounded
        graph.add_edge(("mu", int(i)), ("nu", int(j)))
    if "source" not in graph or "sink" not in graph:
        return False
    flow = nx.maximum_flow_value(graph, "source", "sink", flow_func=edmonds_karp)
    return flow >= 1.0 - FLOW_TOL


def w_infinity(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """inf over couplings of the largest displacement, by bisection over pairwise distances."""
    dist = chord_matrix(mu.points, nu.points)
    thresholds = np.unique(dist)
    lo, hi = 0, len(thresholds) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _coupling_feasible(mu, nu, dist <= thresholds[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(thresholds[lo])


def w_infinity_by_enlargement(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """W-infinity as the least eps with nu(A) <= mu(A^eps) for every A within the support of nu."""
    if nu.size > MAX_ENLARGEMENT_ATOMS:
        raise ResourceLimitError(f"subset enumeration over {nu.size} atoms")
    dist = chord_matrix(mu.points, nu.points)
    worst = 0.0
    for r in range(1, nu.size + 1):
        for subset in itertools.combinations(range(nu.size), r):
            need = nu.weights[list(subset)].sum()
            reach = dist[:, list(subset)].min(axis=1)
            order = np.argsort(reach, kind="stable")
            covered = np.cumsum(mu.weights[order])
            idx = int(np.searchsorted(covered, need - FLOW_TOL))
            worst = max(worst, float(reach[order[min(idx, len(order) - 1)]]))
    return worst


def _transport(mu: DiscreteMeasure, nu: DiscreteMeasure):
    if mu.size + nu.size > MAX_W1_SUPPORT:
        raise ResourceLimitError(
            f"transport problem with {mu.size} + {nu.size} atoms exceeds {MAX_W1_SUPPORT}"
        )
    n, m = mu.size, nu.size
    cost = chord_matrix(mu.points, nu.points)
    rows = sparse.kron(sparse.identity(n), np.ones((1, m)))
    cols = sparse.kron(np.ones((1, n)), sparse.identity(m))
    res = linprog(
        cost.ravel(),
        A_eq=sparse.vstack([rows, cols]).tocsr(),
        b_eq=np.concatenate([mu.weights, nu.weights]),
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        raise InvariantViolation(f"transport solver failed: {res.message}")
    return res


def w_one(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Exact optimal transport cost with ground metric d."""
    return float(_transport(mu, nu).fun)


@dataclass(frozen=True, eq=False)
class KantorovichPotential:
    """phi(z) = min_j d(z, y_j) - v_j, a 1-Lipschitz function attaining W1."""

    anchors: np.ndarray
    offsets: np.ndarray

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return (chord_matrix(np.atleast_2d(points), self.anchors) - self.offsets[None, :]).min(axis=1)


def kantorovich_potential(mu: DiscreteMeasure, nu: DiscreteMeasure) -> KantorovichPotential:
    """Potential from the transport dual; integral of phi against mu - nu equals W1."""
    res = _transport(mu, nu)
    v = np.asarray(res.eqlin.marginals)[mu.size :]
    return KantorovichPotential(nu.points, v)


def dual_lower_bound(
    mu: DiscreteMeasure, nu: DiscreteMeasure, rng: np.random.Generator, trials: int = 1000
) -> float:
    """max of |int phi d(mu - nu)| over 1-Lipschitz test functions.

    Candidates are the transport-dual potential, the distance functions to every atom,
    and random min-combinations of them.
    """
    anchors = np.concatenate([mu.points, nu.points])
    to_mu = chord_matrix(mu.points, anchors)
    to_nu = chord_matrix(nu.points, anchors)
    best = float(np.abs(mu.weights @ to_mu - nu.weights @ to_nu).max())
    phi = kantorovich_potential(mu, nu)
    best = max(best, abs(mu.integrate(phi(mu.points)) - nu.integrate(phi(nu.points))))
    for _ in range(trials):
        offsets = rng.uniform(0.0, 2.0, len(anchors))
        phi_mu = (to_mu + offsets).min(axis=1)
        phi_nu = (to_nu + offsets).min(axis=1)
        best = max(best, abs(mu.integrate(phi_mu) - nu.integrate(phi_nu)))
    return best


def partition_w_infinity_bound(partition_diameters: Sequence[float]) -> float:
    """Largest region diameter: W-infinity between a measure and its snapped version never exceeds it."""
    if len(partition_diameters) == 0:
        raise ParameterError("need at least one region diameter")
    return float(np.max(partition_diameters))


def snap_to_regions(
    mu: DiscreteMeasure, partition: EqualAreaPartition, representatives: Optional[np.ndarray] = None
) -> DiscreteMeasure:
    """sum_i mu(A_i) delta_{z_i}: every atom moved to a chosen point of its region."""
    if representatives is None:
        representatives = np.array([partition.region_center(rid).as_array() for rid in partition.regions()])
    theta, phi = spherical_coordinates(mu.points)
    region = partition.locate_many(theta, phi)
    used, inverse = np.unique(region, return_inverse=True)
    weights = np.bincount(inverse, weights=mu.weights)
    return DiscreteMeasure(representatives[used], weights)


def random_node_measure(
    tri: IcosaTriangulation, rng: np.random.Generator, max_atoms: int = 8
) -> DiscreteMeasure:
    """Vertex-supported measure whose weights share an odd prime denominator.

    No sub-sum of such weights equals 1/2, so 1/2 stays out of the spectrum.
    """
    p = int(rng.choice(ODD_PRIMES))
    n = int(rng.integers(1, min(max_atoms, tri.vertex_count) + 1))
    vertices = rng.choice(tri.vertex_count, size=n, replace=False)
    cuts = np.sort(rng.choice(np.arange(1, p), size=n - 1, replace=False))
    numerators = np.diff(np.concatenate([[0], cuts, [p]]))
    return DiscreteMeasure.on_vertices(tri, vertices, numerators / p)


def random_polynomial(rng: np.random.Generator, max_degree: int = 3, n_terms: int = 4) -> Polynomial:
    terms = []
    for _ in range(n_terms):
        exps = rng.multinomial(int(rng.integers(1, max_degree + 1)), [1 / 3] * 3)
        terms.append(Monomial(float(rng.uniform(-1.0, 1.0)), *map(int, exps)))
    return Polynomial.from_terms(terms)


def median_value(field: ScalarField, tree: ReebTree, mu: DiscreteMeasure) -> float:
    """zeta_mu(F) for a vertex-supported measure."""
    return float(field.values[weighted_median(tree, mu.node_masses(tree.node_count))])


def verify_theorem2(
    field: ScalarField,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    f: InputFunction,
    tree: Optional[ReebTree] = None,
) -> Tuple[float, float]:
    """(|zeta_mu(F) - zeta_nu(F)|, Lip(F) bound * W-infinity(mu, nu)); the first never exceeds the second."""
    tree = tree if tree is not None else build_reeb(field)
    lhs = abs(median_value(field, tree, mu) - median_value(field, tree, nu))
    rhs = pl_lip_bound(f) * w_infinity(mu, nu)
    return lhs, rhs


@dataclass(frozen=True)
class Theorem2Trial:
    trial: int
    lhs: float
    rhs: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + 1e-12


def theorem2_trials(
    N: int, trials: int, seed: int, progress: Optional[Callable[[Theorem2Trial], None]] = None
) -> List[Theorem2Trial]:
    """Random (f, mu, nu) triples on T_N, all drawn from one seeded generator."""
    rng = np.random.default_rng(seed)
    tri = build_triangulation(N)
    results = []
    for t in range(trials):
        f = random_polynomial(rng)
        field = sample(f, tri)
        tree = build_reeb(field)
        mu = random_node_measure(tri, rng)
        nu = random_node_measure(tri, rng)
        lhs, rhs = verify_theorem2(field, mu, nu, f, tree)
        trial = Theorem2Trial(t, lhs, rhs)
        if not trial.passed:
            logger.warning("trial %d: %.6g > %.6g", t, lhs, rhs)
        if progress is not None:
            progress(trial)
        results.append(trial)
    return results


def random_sphere_measure(rng: np.random.Generator, n: int) -> DiscreteMeasure:
    """Random atoms with random positive weights."""
    points = radial_project_many(rng.standard_normal((n, 3)))
    weights = rng.uniform(0.1, 1.0, n)
    return DiscreteMeasure(points, weights / weights.sum())


def great_circle_segment(n: int) -> Tuple[UnitPoint, UnitPoint, DiscreteMeasure, DiscreteMeasure]:
    """(1/n) delta_a + ((n-1)/n) delta_b against delta_b, with a, b on the equator a quarter turn apart."""
    a = UnitPoint.from_spherical(math.pi / 2, 0.0)
    b = UnitPoint.from_spherical(math.pi / 2, math.pi / 2)
    if n == 1:
        mixed = DiscreteMeasure.dirac(a)
    else:
        mixed = DiscreteMeasure(np.stack([a.as_array(), b.as_array()]), np.array([1.0 / n, (n - 1.0) / n]))
    return a, b, mixed, DiscreteMeasure.dirac(b)
