import numpy as np
import pytest

from conftest import random_body
from minkball.measures import (
    GridMeasure,
    blaschke_sum,
    body_from_measure,
    disk_measure,
    integral_breadth,
    mixed_volume,
    pairing,
    shoelace_volume,
    surface_measure,
    symmetrize_measure,
    volume,
    zero_measure,
)
from minkball.support_core import (
    GeometryError,
    canonical_translate,
    convex_envelope,
    disk_support,
    make_grid,
    minkowski_combine,
    point_support,
    regular_polygon,
    support_of_polygon,
    symmetrize_support,
)

UNIT_SQUARE = [[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]]


def square(side, grid):
    return support_of_polygon(np.asarray(UNIT_SQUARE) * side, grid)


class TestSurfaceMeasure:
    def test_unit_square(self):
        assert np.allclose(surface_measure(square(1, make_grid(4))).weights, 1.0)

    @pytest.mark.parametrize("n", [4, 12, 360])
    def test_disk(self, n):
        g = make_grid(n)
        assert np.allclose(surface_measure(disk_support(g)).weights, 2 * np.tan(np.pi / n), rtol=1e-12)
        assert np.allclose(disk_measure(g).weights, 2 * np.tan(np.pi / n), rtol=1e-15)

    def test_triangle_side_lengths(self):
        g = make_grid(12)
        tri = regular_polygon(3, 1.0)
        side = np.linalg.norm(tri[0] - tri[1])
        w = surface_measure(support_of_polygon(tri, g)).weights
        expected = np.zeros(12)
        expected[[1, 5, 9]] = side
        assert np.allclose(w, expected, atol=1e-12)

    def test_negative_weights_rejected(self):
        with pytest.raises(GeometryError):
            GridMeasure(make_grid(4), np.array([1.0, -1.0, 0.0, 0.0]))


class TestMinkowskiProblem:
    def test_unit_square(self):
        h = body_from_measure(GridMeasure(make_grid(4), np.ones(4)))
        assert np.allclose(h.values, 0.5)

    def test_round_trip_up_to_translation(self, rng, grid360):
        for _ in range(5):
            h = random_body(rng, grid360, m=9, centre=rng.normal(size=2))
            back = body_from_measure(surface_measure(h))
            assert np.max(np.abs(back.values - canonical_translate(h).values)) <= 1e-9

    def test_open_measure_rejected(self):
        with pytest.raises(GeometryError):
            body_from_measure(GridMeasure(make_grid(4), np.array([1.0, 0.0, 0.0, 0.0])))


class TestPairing:
    def test_half_perimeter(self):
        g = make_grid(4)
        assert pairing(disk_support(g), surface_measure(square(1, g))) == pytest.approx(2.0, abs=1e-15)

    def test_zero_function(self, rng):
        g = make_grid(24)
        assert pairing(np.zeros(24), surface_measure(random_body(rng, g))) == 0.0

    def test_mixed_area_symmetry(self, rng, grid360):
        for _ in range(10):
            x, y = random_body(rng, grid360), random_body(rng, grid360)
            assert pairing(x, surface_measure(y)) == pytest.approx(pairing(y, surface_measure(x)), abs=1e-9)

    def test_translation_invariance(self, rng):
        g = make_grid(36)
        w = surface_measure(random_body(rng, g))
        assert pairing(point_support(g, (3.0, -1.0)), w) == pytest.approx(0.0, abs=1e-12)

    def test_symmetrization_is_adjoint(self, rng):
        g = make_grid(36)
        f = rng.normal(size=36)
        w = GridMeasure(g, rng.random(36))
        f_even = 0.5 * (f + np.roll(f, -18))
        assert pairing(f, symmetrize_measure(w)) == pytest.approx(pairing(f_even, w), abs=1e-12)


class TestVolume:
    def test_unit_square(self):
        assert volume(square(1, make_grid(4))) == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [4, 36, 360])
    def test_grid_disk_closed_form(self, n):
        assert volume(disk_support(make_grid(n))) == pytest.approx(n * np.tan(np.pi / n), rel=1e-12)

    def test_shoelace_agreement(self, rng, grid360):
        for _ in range(10):
            h = random_body(rng, grid360, m=10)
            assert volume(h) == pytest.approx(shoelace_volume(h), abs=1e-9)

    def test_raw_function_uses_envelope(self):
        g = make_grid(24)
        f = np.ones(24)
        f[7] = 2.0
        assert volume(f, g) == pytest.approx(shoelace_volume(convex_envelope(f, g)), abs=1e-9)

    def test_mixed_volume_of_disk_with_itself(self, grid360):
        d = disk_support(grid360)
        assert mixed_volume(d, d) == pytest.approx(volume(d), rel=1e-12)


class TestBlaschke:
    def test_squares_add(self):
        g = make_grid(8)
        total = blaschke_sum(surface_measure(square(1, g)), surface_measure(square(1, g)))
        assert np.allclose(total.weights, surface_measure(square(2, g)).weights, atol=1e-12)

    def test_zero_is_identity(self, rng):
        g = make_grid(24)
        w = surface_measure(random_body(rng, g))
        assert np.array_equal(blaschke_sum(w, zero_measure(g)).weights, w.weights)

    def test_equals_minkowski_in_the_plane(self, rng, grid360):
        for _ in range(5):
            x, y = random_body(rng, grid360), random_body(rng, grid360)
            via_measures = body_from_measure(blaschke_sum(surface_measure(x), surface_measure(y)))
            via_support = canonical_translate(minkowski_combine(1, x, 1, y))
            assert np.max(np.abs(via_measures.values - via_support.values)) <= 1e-9


class TestSymmetrizeMeasure:
    def test_triangle_gives_hexagon(self):
        g = make_grid(12)
        tri = support_of_polygon(regular_polygon(3, 1.0), g)
        side = np.sqrt(3.0)
        w = symmetrize_measure(surface_measure(tri)).weights
        assert np.allclose(w[[1, 3, 5, 7, 9, 11]], side / 2)
        assert np.allclose(w, surface_measure(symmetrize_support(tri)).weights, atol=1e-12)

    def test_even_measure_unchanged(self, grid360):
        d = disk_measure(grid360)
        assert np.allclose(symmetrize_measure(d).weights, d.weights, rtol=1e-15)


class TestIntegralBreadth:
    def test_disk(self, grid360):
        assert integral_breadth(disk_support(grid360)) == pytest.approx(360 * np.tan(np.pi / 360), rel=1e-12)

    def test_point(self):
        assert integral_breadth(point_support(make_grid(16), (1.0, 2.0))) == pytest.approx(0.0, abs=1e-12)

    def test_unit_square(self):
        assert integral_breadth(square(1, make_grid(4))) == pytest.approx(2.0)
