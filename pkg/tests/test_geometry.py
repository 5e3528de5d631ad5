import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polygrid.geometry import (
    cell_coverage,
    cell_coverage_clip,
    convex_clip,
    partition_ud,
    polygon_area,
    roots_of_unity,
    uh_to_ud,
)

X_89 = np.array([0.767, 0.630, 0.600, 0.525])
X_30 = np.array([0.867, 0.852, 0.867, 0.800])


def shoelace_oracle(points):
    """Brute-force shoelace over explicit (x, y) pairs."""
    total = 0.0
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return abs(total) / 2.0


def random_scores(rng, m, d):
    return rng.uniform(0.05, 1.0, size=(m, d))


class TestRootsOfUnity:
    def test_d4_exact(self):
        zeta = roots_of_unity(4)
        expected = np.array([1, 1j, -1, -1j])
        assert np.allclose(zeta, expected, atol=1e-15)

    def test_angular_gap(self):
        for d in (3, 5, 7, 12):
            zeta = roots_of_unity(d)
            gaps = np.angle(np.roll(zeta, -1) / zeta)
            assert np.allclose(gaps, 2 * np.pi / d)

    def test_rejects_low_d(self):
        with pytest.raises(ValueError):
            roots_of_unity(2)


class TestUhToUd:
    def test_table_row_89(self):
        Z, zeta = uh_to_ud(X_89[np.newaxis, :])
        expected = np.array([0.767, 0.630j, -0.600, -0.525j])
        assert np.allclose(Z[0], expected, atol=1e-15)

    def test_all_ones_square(self):
        Z, zeta = uh_to_ud(np.ones((1, 4)))
        assert np.allclose(Z[0], zeta)

    def test_rejects_zero_score_with_index(self):
        X = np.ones((3, 4))
        X[1, 2] = 0.0
        with pytest.raises(ValueError, match="row 1, column 2"):
            uh_to_ud(X)

    def test_rejects_score_above_one(self):
        X = np.ones((1, 4))
        X[0, 0] = 1.2
        with pytest.raises(ValueError):
            uh_to_ud(X)


class TestPolygonArea:
    def test_unit_square_at_roots(self):
        Z, _ = uh_to_ud(np.ones((1, 4)))
        assert polygon_area(Z[0]) == pytest.approx(2.0, abs=1e-12)

    def test_row_89_against_oracle(self):
        Z, _ = uh_to_ud(X_89[np.newaxis, :])
        pts = [(z.real, z.imag) for z in Z[0]]
        oracle = shoelace_oracle(pts)
        assert polygon_area(Z[0]) == pytest.approx(oracle, abs=1e-12)
        assert oracle == pytest.approx(0.78944, abs=5e-6)

    def test_row_30_against_oracle(self):
        Z, _ = uh_to_ud(X_30[np.newaxis, :])
        pts = [(z.real, z.imag) for z in Z[0]]
        oracle = shoelace_oracle(pts)
        assert polygon_area(Z[0]) == pytest.approx(oracle, abs=1e-12)
        assert oracle == pytest.approx(1.4323, abs=5e-5)

    def test_degenerate_returns_zero(self):
        assert polygon_area(np.array([1 + 0j, 2 + 0j])) == 0.0

    @given(st.integers(min_value=3, max_value=8), st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=40, deadline=None)
    def test_star_decomposition_identity(self, d, seed):
        rng = np.random.default_rng(seed)
        x = rng.uniform(0.01, 1.0, size=d)
        Z, _ = uh_to_ud(x[np.newaxis, :])
        nu = np.sin(2 * np.pi / d) / 2.0
        sigma = nu * np.sum(x * np.roll(x, -1))
        assert polygon_area(Z[0]) == pytest.approx(sigma, rel=1e-12)


class TestConvexClip:
    def test_square_halved(self):
        square = np.array([0 + 0j, 2 + 0j, 2 + 2j, 0 + 2j])
        clip = np.array([0 + 0j, 1 + 0j, 1 + 2j, 0 + 2j])
        out = convex_clip(square, clip)
        assert polygon_area(out) == pytest.approx(2.0)

    def test_disjoint(self):
        square = np.array([0 + 0j, 1 + 0j, 1 + 1j, 0 + 1j])
        clip = square + 5.0
        out = convex_clip(square, clip)
        assert len(out) == 0 or polygon_area(out) == pytest.approx(0.0, abs=1e-12)


class TestPartition:
    def test_sixteen_cells(self):
        part = partition_ud(2, 8, d=4)
        assert part.n_cells == 16
        assert len(part.cells) == 16

    def test_s_invariant_inner_radius(self):
        part = partition_ud(2, 8)
        assert part.radii[0] == pytest.approx(np.sqrt(0.5), abs=1e-12)
        assert part.radii[-1] == 1.0

    def test_r_invariant_radius(self):
        part = partition_ud(2, 8, annulus_type="r-invariant")
        assert part.radii[0] == pytest.approx(0.5)

    def test_single_annulus_cell_areas(self):
        for ann in ("s-invariant", "r-invariant"):
            part = partition_ud(1, 4, annulus_type=ann)
            areas = part.cell_areas()
            assert np.allclose(areas, np.pi / 4, atol=1e-3)

    def test_sector_start(self):
        assert partition_ud(1, 8, sector_type="miss").sector_start == 0.0
        cover = partition_ud(1, 8, sector_type="cover")
        assert cover.sector_start == pytest.approx(-np.pi / 8)

    def test_completeness(self):
        for n_a in (1, 3, 8):
            for n_s in (4, 12):
                for ann in ("s-invariant", "r-invariant"):
                    part = partition_ud(n_a, n_s, annulus_type=ann)
                    assert abs(part.cell_areas().sum() - np.pi) < 1e-3

    def test_equal_area_cells(self):
        part = partition_ud(4, 8)
        areas = part.cell_areas()
        assert areas.max() - areas.min() < 1e-3

    def test_cell_polygons_match_area_formula(self):
        part = partition_ud(3, 4, annulus_type="r-invariant")
        for ring, area in zip(part.cells, part.cell_areas()):
            assert polygon_area(ring) == pytest.approx(area, rel=1e-12)

    def test_tree_radii_validation(self):
        part = partition_ud(3, 4, annulus_type="tree", tree_radii=[0.3, 0.6])
        assert np.allclose(part.radii, [0.3, 0.6, 1.0])
        with pytest.raises(ValueError):
            partition_ud(3, 4, annulus_type="tree", tree_radii=[0.6, 0.3])
        with pytest.raises(ValueError):
            partition_ud(3, 4, annulus_type="tree", tree_radii=[0.3, 1.2])
        with pytest.raises(ValueError):
            partition_ud(3, 4, annulus_type="tree")

    def test_rejects_ns_not_multiple_of_d(self):
        with pytest.raises(ValueError):
            partition_ud(1, 6, d=4)


class TestCellCoverage:
    def test_cyclic_interaction_features(self):
        # single annulus, one sector per domain, miss: features are the
        # areas of the covering triangles nu * x_k * x_{k+1}
        part = partition_ud(1, 4, sector_type="miss", d=4)
        Z, _ = uh_to_ud(X_89[np.newaxis, :])
        s = cell_coverage(Z, part)[0]
        nu = 0.5
        x = X_89
        expected = nu * np.array([x[0] * x[1], x[1] * x[2], x[2] * x[3], x[3] * x[0]])
        assert np.allclose(s, expected, atol=1e-9)

    def test_all_ones_square_split(self):
        part = partition_ud(1, 4, sector_type="miss", d=4)
        Z, _ = uh_to_ud(np.ones((1, 4)))
        s = cell_coverage(Z, part)[0]
        assert np.allclose(s, 0.5, atol=1e-9)

    def test_conservation_random(self):
        rng = np.random.default_rng(7)
        X = random_scores(rng, 50, 4)
        Z, _ = uh_to_ud(X)
        areas = polygon_area(Z)
        for n_a in (1, 2, 5):
            for nspd in (1, 2, 3):
                for ann in ("s-invariant", "r-invariant"):
                    for sec in ("miss", "cover"):
                        part = partition_ud(n_a, nspd * 4, annulus_type=ann, sector_type=sec, d=4)
                        s = cell_coverage(Z, part)
                        assert np.all(np.abs(s.sum(axis=1) - areas) < 1e-6 * areas)

    def test_conservation_with_extreme_scores(self):
        # column maxima are exactly 1.0 after scaling; vertices on the rim
        # must not lose area, including under "cover" placement
        X = np.array([[1.0, 1.0, 1.0, 1.0], [1.0, 0.001, 1.0, 0.001]])
        Z, _ = uh_to_ud(X)
        areas = polygon_area(Z)
        for sec in ("miss", "cover"):
            part = partition_ud(3, 8, sector_type=sec, d=4)
            s = cell_coverage(Z, part)
            assert np.all(np.abs(s.sum(axis=1) - areas) < 1e-9 * np.maximum(areas, 1e-6))

    def test_matches_clip_reference(self):
        rng = np.random.default_rng(11)
        X = random_scores(rng, 5, 5)
        Z, _ = uh_to_ud(X)
        for ann, sec, n_a, nspd in [
            ("s-invariant", "miss", 2, 1),
            ("r-invariant", "cover", 3, 2),
            ("tree", "miss", 2, 1),
        ]:
            radii = [0.4] if ann == "tree" else None
            part = partition_ud(n_a, nspd * 5, annulus_type=ann, sector_type=sec,
                                tree_radii=radii, d=5)
            fast = cell_coverage(Z, part)
            ref = cell_coverage_clip(Z, part)
            assert np.allclose(fast, ref, atol=1e-9)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        X = random_scores(rng, 20, 6)
        Z, _ = uh_to_ud(X)
        part = partition_ud(4, 6, d=6)
        s = cell_coverage(Z, part)
        assert np.all(s >= -1e-12)

    def test_single_row_shape(self):
        part = partition_ud(2, 4, d=4)
        Z, _ = uh_to_ud(X_89[np.newaxis, :])
        s = cell_coverage(Z[0], part)
        assert s.shape == (8,)
