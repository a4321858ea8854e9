import math

import numpy as np
import pytest
from sphere.base import NORTH_POLE, SOUTH_POLE, UnitPoint, random_unit_points, spherical_coordinates, to_unit_points
from sphere.errors import ParameterError
from sphere.partition import (
    LOCATE_WINDOW,
    RegionId,
    build_partition,
    diameter_bound,
    inradius_bound,
    locate_by_scan,
    region_area,
    region_diameter_audit,
    region_diameters,
    region_inradii,
    region_inradius_audit,
)

AUDITED_K = [237, 243, 1001]


@pytest.fixture(scope="module", params=AUDITED_K)
def partition(request):
    return build_partition(request.param)


class TestBuildPartition:
    @pytest.mark.parametrize("k", [236, 235, 244, 1])
    def test_rejects_invalid_k(self, k):
        with pytest.raises(ParameterError, match="odd integer"):
            build_partition(k)

    def test_counts(self, partition):
        assert int(partition.sector_counts.sum()) == partition.k
        assert partition.sector_counts[0] == 6
        assert partition.sector_counts[-1] == 6
        assert np.all(partition.sector_counts >= 1)

    def test_band_number_is_odd(self, partition):
        assert partition.n % 2 == 1
        assert partition.n <= math.sqrt(partition.k / 2) < partition.n + 2

    def test_k243_layout(self):
        p = build_partition(243)
        assert p.n == 11
        assert p.band_count == 13

    def test_latitudes_increase(self, partition):
        assert np.all(np.diff(partition.band_latitudes) > 0)
        assert partition.band_latitudes[0] == 0.0
        assert partition.band_latitudes[-1] == math.pi

    def test_polar_cap_latitude(self, partition):
        assert math.cos(partition.band_latitudes[1]) == pytest.approx(1 - 12 / partition.k)

    def test_equal_areas(self, partition):
        target = 4 * math.pi / partition.k
        areas = np.array([region_area(partition, rid) for rid in partition.regions()])
        assert len(areas) == partition.k
        assert np.max(np.abs(areas - target)) / target <= 1e-9

    @pytest.mark.parametrize("k", [237, 501, 1001, 2001])
    def test_latitude_deviation_scales(self, k):
        # sqrt(k) * max |theta_i - theta'_i|; rounding drift over i bands stays under i regions
        p = build_partition(k)
        assert 0.0 <= p.latitude_deviation() <= 1.5
        assert p.latitude_deviation() / math.sqrt(k) < LOCATE_WINDOW * p.latitude_step


class TestAudits:
    def test_diameter_bound(self, partition):
        assert region_diameter_audit(partition) <= diameter_bound(partition.k)

    def test_inradius_bound(self, partition):
        assert region_inradius_audit(partition) >= inradius_bound(partition.k)

    def test_diameters_per_region(self, partition):
        diameters = region_diameters(partition)
        assert diameters.shape == (partition.k,)

    @pytest.mark.parametrize("k", [237, 243, 1001])
    def test_polar_cap_inradius(self, k):
        p = build_partition(k)
        half_sine = 0.5 * math.sin(p.band_latitudes[1] / 2)
        inradii = region_inradii(p)
        for rid in (RegionId(0, 1), RegionId(p.n + 1, 1)):
            chord = inradii[p.flat_index(rid)]
            assert chord >= half_sine
            assert 2 * math.asin(chord / 2) >= half_sine

    def test_k243_bound_value(self):
        assert diameter_bound(243) == pytest.approx(0.44905, abs=1e-5)


class TestRegions:
    def test_flat_index_round_trip(self, partition):
        for index in range(0, partition.k, 7):
            assert partition.flat_index(partition.region_at(index)) == index

    def test_region_bounds_validation(self, partition):
        with pytest.raises(ParameterError):
            partition.region_bounds(RegionId(0, 7))
        with pytest.raises(ParameterError):
            partition.region_bounds(RegionId(partition.n + 2, 1))

    def test_center_inside(self, partition):
        for rid in partition.regions():
            assert partition.contains(rid, partition.region_center(rid))

    def test_regions_enumeration_order(self, partition):
        rids = list(partition.regions())
        assert rids[0] == RegionId(0, 1)
        assert rids[-1] == RegionId(partition.n + 1, 6)


class TestLocate:
    def test_poles(self, partition):
        assert partition.locate(NORTH_POLE) == RegionId(0, 1)
        assert partition.locate(SOUTH_POLE) == RegionId(partition.n + 1, 1)

    def test_half_open_seam(self, partition):
        """Points on phi = 0 belong to the first sector."""
        p = UnitPoint.from_spherical(math.pi / 2, 0.0)
        assert partition.locate(p).sector == 1

    def test_band_boundary_opens_next_band(self, partition):
        theta = float(partition.band_latitudes[3])
        assert partition.locate(UnitPoint.from_spherical(theta, 0.1)).band == 3

    def test_agrees_with_scan(self, partition):
        rng = np.random.default_rng(partition.k)
        for p in to_unit_points(random_unit_points(rng, 1000)):
            assert partition.locate(p) == locate_by_scan(partition, p)

    @pytest.mark.slow
    def test_agrees_with_scan_full(self, partition):
        rng = np.random.default_rng(10_000 + partition.k)
        mismatches = sum(
            partition.locate(p) != locate_by_scan(partition, p)
            for p in to_unit_points(random_unit_points(rng, 10_000))
        )
        assert mismatches == 0

    def test_locate_many_matches_locate(self, partition):
        rng = np.random.default_rng(5)
        xyz = random_unit_points(rng, 2000)
        flat = partition.locate_many(*spherical_coordinates(xyz))
        expected = [partition.flat_index(partition.locate(p)) for p in to_unit_points(xyz)]
        np.testing.assert_array_equal(flat, expected)

    def test_locate_many_band_boundaries(self, partition):
        theta = partition.band_latitudes[1:-1]
        flat = partition.locate_many(theta, np.zeros_like(theta))
        expected = [partition.flat_index(partition.locate(UnitPoint.from_spherical(float(t), 0.0))) for t in theta]
        np.testing.assert_array_equal(flat, expected)
