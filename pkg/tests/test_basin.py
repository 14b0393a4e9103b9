import math

import numpy as np
import pytest

from kuramoto3.basin import (
    BasinGrid,
    SweepConfig,
    basin_report,
    cell_centers,
    grid_to_csv,
    lifted_initials,
    reflection_mismatches,
    region_mask,
    sweep,
    verify_region_subset,
)
from kuramoto3.diameter import region_membership
from kuramoto3.equilibria import CriticalPointId as C
from kuramoto3.integrate import limit_point
from kuramoto3.model import Coupling


@pytest.fixture(scope="module")
def mixed64():
    return sweep(SweepConfig(64, Coupling(-1, 1)))


def near_boundary(cells, a, b, reach=2):
    res = cells.shape[0]
    labels = {cells[(a + da) % res, (b + db) % res] for da in range(-reach, reach + 1) for db in range(-reach, reach + 1)}
    return len(labels - {0}) > 1


class TestGeometry:
    def test_centres_avoid_pi(self):
        c = cell_centers(4)
        np.testing.assert_allclose(c, [-3 * math.pi / 4, -math.pi / 4, math.pi / 4, 3 * math.pi / 4])

    def test_lift_row_major(self):
        lifts = lifted_initials(3)
        c = cell_centers(3)
        assert lifts.shape == (9, 3)
        np.testing.assert_array_equal(lifts[1], [c[0], c[1], 0.0])
        np.testing.assert_array_equal(lifts[3], [c[1], c[0], 0.0])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(1, Coupling(1, 1))


class TestSweep:
    def test_tiny_grid(self):
        grid = sweep(SweepConfig(2, Coupling(-1, 1)))
        assert grid.cells.shape == (2, 2)
        # the diagonal t1 = t2 is invariant and forms the stable manifold of the saddle star3
        assert grid.cells[0, 0] == grid.cells[1, 1] == 3
        assert {grid.cells[0, 1], grid.cells[1, 0]} <= {0, 5, 6}

    def test_cells_follow_limit_point(self, mixed64):
        c = cell_centers(64)
        for a, b in [(0, 0), (10, 50), (33, 7), (63, 20), (40, 40)]:
            res = limit_point((c[a], c[b], 0.0), Coupling(-1, 1), SweepConfig(2, Coupling(-1, 1)).integrator)
            assert mixed64.cells[a, b] == (res.target.index if res.target else 0)

    def test_determinism_across_workers(self):
        cfg = SweepConfig(16, Coupling(-1, 1))
        serial = sweep(cfg)
        again = sweep(cfg)
        parallel = sweep(SweepConfig(16, Coupling(-1, 1), workers=2))
        np.testing.assert_array_equal(serial.cells, again.cells)
        np.testing.assert_array_equal(serial.cells, parallel.cells)

    def test_global_convergence(self, mixed64):
        cells = mixed64.cells
        report = basin_report(mixed64)
        assert report.unclassified_fraction <= 0.005
        for a, b in zip(*np.nonzero(cells == 0)):
            assert near_boundary(cells, a, b)

    def test_reflection_symmetry(self, mixed64):
        assert reflection_mismatches(mixed64) < 0.01 * mixed64.cells.size

    def test_theorem_containment(self, mixed64):
        assert verify_region_subset(mixed64, C.STAR5) == []
        assert verify_region_subset(mixed64, C.STAR6) == []

    def test_fractions(self, mixed64):
        report = basin_report(mixed64)
        assert report.area_fraction[C.STAR5] == pytest.approx(0.5, abs=0.02)
        assert report.area_fraction[C.STAR6] == pytest.approx(0.5, abs=0.02)

    @pytest.mark.parametrize("coupling,winner", [(Coupling(1, 1), C.STAR3), (Coupling(1, -1), C.STAR4),
                                                 (Coupling(-1, 3), C.STAR3), (Coupling(-1, -3), C.STAR4)])
    def test_single_stable_regimes(self, coupling, winner):
        report = basin_report(sweep(SweepConfig(32, coupling)))
        assert report.area_fraction[winner] >= 0.99


class TestReport:
    def test_all_one_class(self):
        grid = BasinGrid(4, np.full((4, 4), 5, dtype=np.int8), Coupling(-1, 1))
        report = basin_report(grid)
        assert report.area_fraction[C.STAR5] == 1.0 and report.unclassified_fraction == 0.0
        assert report.violations == []

    def test_checkerboard(self):
        cells = np.where(np.indices((4, 4)).sum(axis=0) % 2 == 0, 5, 6).astype(np.int8)
        report = basin_report(BasinGrid(4, cells, Coupling(-1, 1)))
        assert report.area_fraction[C.STAR5] == 0.5 and report.area_fraction[C.STAR6] == 0.5

    def test_fractions_sum_to_one(self, rng):
        cells = rng.integers(0, 7, (9, 9)).astype(np.int8)
        report = basin_report(BasinGrid(9, cells, Coupling(-1, 1)))
        assert sum(report.area_fraction.values()) + report.unclassified_fraction == pytest.approx(1.0, abs=1e-12)


class TestRegionSubset:
    def test_mask_matches_shifted_membership(self):
        mask = region_mask(16, C.STAR5)
        c = cell_centers(16)
        for a in range(16):
            for b in range(16):
                lifts = [(c[a] + 2 * math.pi * i, c[b] + 2 * math.pi * j, 0.0) for i in (-1, 0, 1) for j in (-1, 0, 1)]
                assert mask[a, b] == any(region_membership(t, C.STAR5) for t in lifts)

    def test_star5_cell_is_fine(self):
        # (-pi/3, pi/3) is the centre of cell (16, 32) at res 48
        res = 48
        c = cell_centers(res)
        a = int(np.argmin(np.abs(c + math.pi / 3)))
        b = int(np.argmin(np.abs(c - math.pi / 3)))
        cells = np.zeros((res, res), dtype=np.int8)
        cells[region_mask(res, C.STAR5)] = 5
        assert verify_region_subset(BasinGrid(res, cells, Coupling(-1, 1)), C.STAR5) == []
        cells[a, b] = 6
        assert verify_region_subset(BasinGrid(res, cells, Coupling(-1, 1)), C.STAR5) == [(a, b)]


def test_csv_format():
    cells = np.array([[5, 0], [6, 3]], dtype=np.int8)
    text = grid_to_csv(BasinGrid(2, cells, Coupling(-1, 1)))
    lines = text.splitlines()
    assert lines[0] == "x,y,class"
    assert [l.split(",")[2] for l in lines[1:]] == ["star5", "unclassified", "star6", "star3"]
    x, y = (float(v) for v in lines[2].split(",")[:2])
    assert (x, y) == (-math.pi / 2, math.pi / 2)
    assert text.endswith("\n") and "\r" not in text
