import math

import networkx as nx
import numpy as np
import pytest
from field.pl import ScalarField
from field.reeb import ReebTree
from harness.config import generic_rotation
from quasistate.median import (
    MedianSolver,
    QuasiStateResult,
    aggregated_constant,
    check_spectrum,
    compute,
    compute_for_epsilon,
    count_pass,
    error_bound,
    find_median,
    integral_oracle,
    k_for_N,
    mark_vertices,
    region_centers,
    select_parameters,
    validate_parameters,
    weighted_median,
)
from quasistate.wasserstein import random_polynomial
from sphere.base import spherical_coordinates
from sphere.constants import DIAMETER_CONSTANT, INRADIUS_CONSTANT, K_RATIO, STATED_AGGREGATED_CONSTANT
from sphere.errors import InvariantViolation, ParameterError, ResourceLimitError, SpectrumError
from sphere.functions import Polynomial, VertexTable
from sphere.icosa import build_triangulation
from sphere.partition import build_partition
from sphere.registry import get_function


@pytest.fixture(scope="module")
def solver46():
    return MedianSolver(46, 243)


def random_tree(rng, n):
    parent = [int(rng.integers(0, i)) for i in range(1, n)]
    return ReebTree.from_arcs([(p, i) for i, p in enumerate(parent, start=1)], 0)


def random_marks(rng, n):
    k = int(rng.integers(0, (n - 1) // 2 + 1)) * 2 + 1
    marks = np.zeros(n, dtype=bool)
    marks[rng.choice(n, size=k, replace=False)] = True
    return marks, k


def brute_medians(tree, marks, k):
    """Nodes whose removal leaves components with fewer than (k + 1) / 2 marks each."""
    graph = nx.Graph([tuple(a) for a in tree.arcs.tolist()])
    found = []
    for m in graph.nodes:
        rest = graph.copy()
        rest.remove_node(m)
        if all(sum(marks[v] for v in comp) < (k + 1) // 2 for comp in nx.connected_components(rest)):
            found.append(m)
    return found


class TestParameters:
    def test_k_for_N(self):
        assert k_for_N(46) == 243
        assert k_for_N(47) == 255
        assert k_for_N(92) == 979
        assert k_for_N(184) == 3917

    def test_k_for_N_is_largest_odd_admissible(self):
        for N in range(46, 400):
            k = k_for_N(N)
            assert k % 2 == 1
            assert k <= K_RATIO * N * N < k + 2

    def test_validate(self):
        validate_parameters(46, 243)
        validate_parameters(46, 237)
        with pytest.raises(ParameterError):
            validate_parameters(45, 237)
        with pytest.raises(ParameterError):
            validate_parameters(46, 244)
        with pytest.raises(ParameterError):
            validate_parameters(46, 245)
        with pytest.raises(ParameterError):
            validate_parameters(100, 235)

    def test_error_bound(self):
        assert error_bound(math.sqrt(3.0), 46, 243) == pytest.approx(5.9177, abs=1e-4)
        assert error_bound(0.0, 46, 243) == 0.0

    def test_aggregated_constant(self):
        assert aggregated_constant(46) == pytest.approx(157, abs=1.0)
        assert aggregated_constant(46) < STATED_AGGREGATED_CONSTANT

    def test_constant_function_takes_smallest_pair(self):
        assert select_parameters(1e-3, 0.0) == (46, 243)

    def test_epsilon_one_is_minimal(self):
        lip = math.sqrt(3.0)
        N, k = select_parameters(1.0, lip)
        assert k == k_for_N(N)
        assert error_bound(lip, N, k) <= 1.0
        assert error_bound(lip, N - 1, k_for_N(N - 1)) > 1.0

    def test_marking_feasible_for_all_selected_sizes(self):
        for N in range(46, 4601):
            k = k_for_N(N)
            assert INRADIUS_CONSTANT / math.sqrt(k) > DIAMETER_CONSTANT / N

    def test_tiny_epsilon_exhausts_resources(self):
        with pytest.raises(ResourceLimitError, match="requires N="):
            select_parameters(1e-6, 1.0)

    def test_bad_inputs(self):
        with pytest.raises(ParameterError):
            select_parameters(0.0, 1.0)
        with pytest.raises(ParameterError):
            select_parameters(1.0, -1.0)


class TestMarking:
    def test_one_mark_per_region(self, solver46):
        marked = solver46.marked
        assert marked.marked_count == 243
        assert marked.region_flags.all()
        theta, phi = spherical_coordinates(solver46.tri.vertices[marked.Z])
        np.testing.assert_array_equal(solver46.partition.locate_many(theta, phi), np.arange(243))

    def test_marks_are_interior(self, solver46):
        partition, tri = solver46.partition, solver46.tri
        for index, v in enumerate(solver46.marked.Z):
            t0, t1, p0, p1 = partition.region_bounds(partition.region_at(index))
            theta, phi = spherical_coordinates(tri.vertices[v][None, :])
            assert t0 < theta[0] < t1
            assert p0 < phi[0] < p1

    def test_nearest_interior_vertex_wins(self, solver46):
        partition, tri = solver46.partition, solver46.tri
        theta, phi = spherical_coordinates(tri.vertices)
        region = partition.locate_many(theta, phi)
        centers = region_centers(partition)
        for index, v in list(enumerate(solver46.marked.Z))[:20]:
            t0, t1, p0, p1 = partition.region_bounds(partition.region_at(index))
            best = np.linalg.norm(tri.vertices[v] - centers[index])
            for u in np.flatnonzero(region == index):
                if not (t0 < theta[u] < t1 and p0 < phi[u] < p1):
                    continue
                d = np.linalg.norm(tri.vertices[u] - centers[index])
                assert d >= best - 1e-12

    def test_marks_close_to_centers(self, solver46):
        centers = region_centers(solver46.partition)
        dist = np.linalg.norm(solver46.tri.vertices[solver46.marked.Z] - centers, axis=1)
        assert dist.max() <= DIAMETER_CONSTANT / 46

    def test_centers_match_region_center(self, solver46):
        partition = solver46.partition
        centers = region_centers(partition)
        for index in (0, 7, 120, 242):
            np.testing.assert_allclose(
                centers[index], partition.region_center(partition.region_at(index)).as_array(), atol=1e-12
            )

    def test_deterministic(self, solver46):
        again = mark_vertices(build_triangulation(46), build_partition(243))
        np.testing.assert_array_equal(again.Z, solver46.marked.Z)

    def test_finer_triangulation(self):
        assert mark_vertices(build_triangulation(92), build_partition(243)).marked_count == 243

    def test_random_admissible_pairs(self):
        rng = np.random.default_rng(2024)
        for _ in range(20):
            N = int(rng.integers(46, 121))
            k_max = k_for_N(N)
            k = int(rng.choice(np.arange(237, k_max + 1, 2)))
            assert mark_vertices(build_triangulation(N), build_partition(k)).marked_count == k

    def test_too_coarse_triangulation_fails(self):
        with pytest.raises(InvariantViolation, match="hold no interior vertex"):
            mark_vertices(build_triangulation(2), build_partition(243))


class TestCountAndMedian:
    def test_path(self):
        tree = ReebTree.from_arcs([(0, 1), (1, 2), (2, 3), (3, 4)], 0)
        counts = count_pass(tree, np.ones(5, dtype=bool))
        np.testing.assert_array_equal(counts, [5, 4, 3, 2, 1])
        assert find_median(tree, counts, 5) == 2

    def test_star(self):
        tree = ReebTree.from_arcs([(0, 1), (0, 2), (0, 3), (0, 4)], 0)
        counts = count_pass(tree, np.ones(5, dtype=bool))
        np.testing.assert_array_equal(counts, [5, 1, 1, 1, 1])
        assert find_median(tree, counts, 5) == 0

    def test_leaf_and_root_counts(self):
        rng = np.random.default_rng(0)
        tree = random_tree(rng, 15)
        marks, k = random_marks(rng, 15)
        counts = count_pass(tree, marks)
        assert counts[tree.root] == k
        leaves = np.flatnonzero(tree.child_counts == 0)
        np.testing.assert_array_equal(counts[leaves], marks[leaves].astype(int))

    def test_counts_match_subtree_enumeration(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(1, 21))
            tree = random_tree(rng, n)
            marks, _ = random_marks(rng, n)
            directed = nx.DiGraph()
            directed.add_nodes_from(range(n))
            directed.add_edges_from((int(tree.parent[v]), v) for v in range(n) if tree.parent[v] >= 0)
            expected = [int(marks[v]) + sum(int(marks[w]) for w in nx.descendants(directed, v)) for v in range(n)]
            np.testing.assert_array_equal(count_pass(tree, marks), expected)

    def test_median_matches_component_characterization(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(2, 21))
            tree = random_tree(rng, n)
            marks, k = random_marks(rng, n)
            median = find_median(tree, count_pass(tree, marks), k)
            assert brute_medians(tree, marks, k) == [median]

    def test_weighted_median_agrees_with_counts(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(2, 21))
            tree = random_tree(rng, n)
            marks, k = random_marks(rng, n)
            median = find_median(tree, count_pass(tree, marks), k)
            assert weighted_median(tree, marks / k) == median

    def test_half_mass_is_rejected(self):
        tree = ReebTree.from_arcs([(0, 1), (1, 2)], 0)
        with pytest.raises(SpectrumError):
            weighted_median(tree, np.array([0.5, 0.25, 0.25]))
        with pytest.raises(SpectrumError):
            check_spectrum(tree, np.array([1.0, 0.5, 0.25]))
        check_spectrum(tree, np.array([1.0, 0.6, 0.4]))

    def test_weighted_median_validates_masses(self):
        tree = ReebTree.from_arcs([(0, 1)], 0)
        with pytest.raises(ParameterError):
            weighted_median(tree, np.array([0.5, 0.6]))
        with pytest.raises(ParameterError):
            weighted_median(tree, np.array([1.0]))

    def test_no_heavy_node(self):
        tree = ReebTree.from_arcs([(0, 1)], 0)
        with pytest.raises(InvariantViolation):
            find_median(tree, np.array([1, 0]), 5)


class TestCompute:
    def test_height(self, solver46):
        result = solver46.compute(get_function("z"))
        assert isinstance(result, QuasiStateResult)
        assert abs(result.value) <= result.error_bound
        assert abs(result.value) <= 0.05
        assert result.error_bound == pytest.approx(5.9177, abs=1e-4)
        assert result.value == solver46.sample(get_function("z")).values[result.median_node]

    def test_shifted_square(self):
        result = compute(get_function("shifted-square"), 92, k_for_N(92))
        assert abs(result.value - 0.09) <= result.error_bound

    def test_constant(self, solver46):
        result = solver46.compute(Polynomial.constant(5.0))
        assert result.value == 5.0
        assert result.error_bound == 0.0

    def test_for_epsilon(self):
        result = compute_for_epsilon(Polynomial.constant(2.0), 0.1)
        assert (result.N, result.k) == (46, 243)
        assert result.value == 2.0

    def test_result_dict(self, solver46):
        data = solver46.compute(get_function("z")).to_dict()
        assert set(data) == {"value", "error_bound", "N", "k", "lip_bound", "median_node"}

    def test_table_without_bound(self, solver46):
        table = VertexTable(46, tuple(solver46.tri.vertices[:, 2].tolist()))
        with pytest.raises(ParameterError, match="Lipschitz"):
            solver46.compute(table)

    def test_table_with_bound(self, solver46):
        table = VertexTable(46, tuple(solver46.tri.vertices[:, 2].tolist()), lip=1.0)
        assert solver46.compute(table).value == solver46.compute(get_function("z")).value

    def test_field_on_wrong_triangulation(self, solver46):
        tri = build_triangulation(4)
        with pytest.raises(ParameterError):
            solver46.median_of_field(ScalarField(tri, tri.vertices[:, 2].copy()))

    def test_median_splits_marks(self, solver46):
        field = solver46.sample(get_function("z").polynomial.with_rotation(generic_rotation(4)))
        tree, m = solver46.median_of_field(field)
        counts = count_pass(tree, solver46.marked.marks)
        half = (243 - 1) // 2
        assert 243 - counts[m] <= half
        assert all(counts[c] <= half for c in tree.children(m))

    def test_integral_oracle(self, solver46):
        field = solver46.sample(get_function("z"))
        tree, m = solver46.median_of_field(field)
        assert integral_oracle(field, tree, m) == pytest.approx(field.values[m], abs=1e-12)
        assert integral_oracle(field, tree, m) == pytest.approx(solver46.compute(get_function("z")).value, abs=1e-12)

    def test_integral_oracle_constant(self):
        tri = build_triangulation(2)
        field = ScalarField(tri, np.full(tri.vertex_count, -1.5))
        tree = ReebTree.from_arcs(np.column_stack([np.zeros(41, int), np.arange(1, 42)]), 0, field)
        assert integral_oracle(field, tree, 7) == -1.5


def rotated_pair(rng, seed):
    """Generic f and g >= f + 0.05, both composed with one rotation."""
    f = random_polynomial(rng)
    q = random_polynomial(rng, max_degree=2, n_terms=2)
    g = f + q * q + 0.05
    rotation = generic_rotation(seed)
    return f.with_rotation(rotation), g.with_rotation(rotation)


def check_axioms(solver, f, g):
    field_f, field_g = solver.sample(f), solver.sample(g)
    assert np.all(field_f.values <= field_g.values)
    tree_f, m_f = solver.median_of_field(field_f)
    _, m_g = solver.median_of_field(field_g)
    zf, zg = field_f.values[m_f], field_g.values[m_g]
    assert zf <= zg
    assert abs(zf - zg) <= np.max(np.abs(field_f.values - field_g.values))
    for a in (2.0, -1.0, 0.5):
        moved = field_f.affine(a, 0.25)
        _, m = solver.median_of_field(moved)
        assert moved.values[m] == a * zf + 0.25
        assert solver.compute(f.affine(a, 0.25)).value == pytest.approx(a * zf + 0.25, abs=1e-12)
    assert integral_oracle(field_f, tree_f, m_f) == pytest.approx(zf, abs=1e-12)


class TestQuasiStateAxioms:
    def test_few_pairs(self, solver46):
        rng = np.random.default_rng(46)
        for t in range(3):
            check_axioms(solver46, *rotated_pair(rng, t))

    @pytest.mark.slow
    def test_hundred_pairs(self, solver46):
        rng = np.random.default_rng(4646)
        for t in range(100):
            check_axioms(solver46, *rotated_pair(rng, t))


@pytest.mark.slow
class TestLargeRuns:
    @pytest.mark.parametrize("key,expected", [("z", 0.0), ("shifted-square", 0.09)])
    def test_certified_at_all_sizes(self, key, expected):
        bounds = []
        for N in (46, 92, 184):
            result = compute(get_function(key), N, k_for_N(N))
            error = abs(result.value - expected)
            assert error <= result.error_bound
            # marks sit within one triangle diameter of their region centers
            assert error <= 2 * DIAMETER_CONSTANT / N
            bounds.append(result.error_bound)
        assert bounds[0] > bounds[1] > bounds[2]

    @pytest.mark.parametrize("N,limit", [(46, 0.05), (92, 0.03)])
    @pytest.mark.parametrize("key,expected", [("z", 0.0), ("shifted-square", 0.09)])
    def test_measured_error(self, key, expected, N, limit):
        assert abs(compute(get_function(key), N, k_for_N(N)).value - expected) <= limit

    def test_height_at_92(self):
        assert abs(compute(get_function("z"), 92, k_for_N(92)).value) <= 0.03
