import numpy as np
import pytest

from minkball.measures import integral_breadth
from minkball.rotation import (
    RevolutionBody,
    axial_breadth,
    dominates,
    lens_criterion_check,
    lens_geometry,
    revolve_mean_width,
    revolve_volume,
    solve_lens_alpha,
    transfer_spot_check,
)
from minkball.solvers.problems import internal_region, solve_internal_urysohn_flatten
from minkball.support_core import (
    GeometryError,
    SupportVector,
    disk_support,
    make_grid,
    regular_polygon,
    scale,
    support_of_polygon,
)


def square(side, grid):
    s = side / 2
    return support_of_polygon([[s, s], [-s, s], [-s, -s], [s, -s]], grid)


class TestVolume:
    def test_cylinder(self):
        body = RevolutionBody(square(2, make_grid(360)), 90)
        assert revolve_volume(body) == pytest.approx(2 * np.pi, rel=1e-12)

    def test_sphere(self, grid360):
        assert revolve_volume(RevolutionBody(disk_support(grid360), 90)) == pytest.approx(4 * np.pi / 3, rel=1e-3)

    def test_segment_on_axis(self):
        seg = support_of_polygon([[0.0, -1.0], [0.0, 1.0]], make_grid(36))
        assert revolve_volume(RevolutionBody(seg, 9)) == 0.0

    def test_asymmetric_profile_rejected(self):
        g = make_grid(36)
        tri = support_of_polygon(regular_polygon(3, 1.0), g)
        with pytest.raises(GeometryError):
            RevolutionBody(tri, 0)


class TestMeanWidth:
    def test_sphere(self, grid360):
        assert revolve_mean_width(RevolutionBody(disk_support(grid360), 90)) == pytest.approx(2.0, abs=1e-4)

    def test_cylinder_against_monte_carlo(self):
        rng = np.random.default_rng(3)
        v = rng.normal(size=(2_000_000, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        # cylinder of radius 1 and half-height 1 about the z axis
        h = np.abs(v[:, 2]) + np.hypot(v[:, 0], v[:, 1])
        estimate = 2.0 * h.mean()
        body = RevolutionBody(square(2, make_grid(360)), 90)
        assert revolve_mean_width(body) == pytest.approx(estimate, abs=1e-3)

    def test_homogeneity(self):
        g = make_grid(72)
        tri = support_of_polygon(regular_polygon(3, 1.0), g)
        base = RevolutionBody(tri, 18)
        assert revolve_mean_width(RevolutionBody(scale(2.5, tri), 18)) == pytest.approx(
            2.5 * revolve_mean_width(base), rel=1e-12)

    def test_axial_breadth(self):
        g = make_grid(72)
        assert axial_breadth(RevolutionBody(square(2, g), 18)) == pytest.approx(2.0)


class TestLens:
    def test_geometry_closed_form(self):
        R, t, V = lens_geometry(np.pi / 2)
        assert (R, t) == pytest.approx((1.0, 1.0))
        assert V == pytest.approx(4 * np.pi / 3)

    def test_ball_limit(self):
        rep = lens_criterion_check(np.pi / 2)
        assert rep.alpha == pytest.approx(1.0)
        assert rep.residual <= 1e-4

    @pytest.mark.parametrize("theta", [0.4, 0.8, 1.2])
    def test_criterion_residual(self, theta):
        rep = lens_criterion_check(theta, n=720)
        assert rep.passed and rep.residual <= 1e-3
        # the quadrature solve agrees with the closed form at double resolution
        assert solve_lens_alpha(theta, n=1440) == pytest.approx(rep.alpha, rel=1e-3)

    def test_non_lens_fails(self):
        g = make_grid(720)
        other = RevolutionBody(square(2, g), 180)
        assert lens_criterion_check(0.8, body=other).residual > 1e-2


class TestTransfer:
    def setup_method(self):
        g = make_grid(72)
        self.square = square(2, g)
        c = 0.8 * integral_breadth(self.square)
        self.region = internal_region(self.square, 18, c, 1.5)
        self.opt, _ = solve_internal_urysohn_flatten(self.square, 18, c, 1.5)

    def test_no_trials_is_vacuous(self):
        rep = transfer_spot_check(self.opt.h, 18, self.region, trials=0)
        assert rep.passed and rep.checked == 0

    def test_no_dominator_among_perturbations(self):
        rep = transfer_spot_check(self.opt.h, 18, self.region, trials=50)
        assert rep.passed
        assert rep.checked + rep.excluded == 50

    def test_infeasible_candidate_is_excluded(self):
        bigger = SupportVector(self.opt.h.grid, 1.1 * self.opt.h.values)
        rep = transfer_spot_check(self.opt.h, 18, self.region, trials=0, candidates=[bigger])
        assert rep.excluded == 1 and rep.checked == 0


def test_dominates():
    assert dominates((2.0, 1.0), (1.0, 1.0))
    assert not dominates((1.0, 1.0), (1.0, 1.0))
    assert not dominates((2.0, 2.0), (1.0, 1.0))
