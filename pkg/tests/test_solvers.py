import warnings

import numpy as np
import pytest
from scipy.optimize import minimize

from oracles import lattice_max_volume, random_symmetric_region
from minkball.measures import disk_measure, integral_breadth, surface_measure, volume
from minkball.solvers import (
    CertificateWarning,
    FeasibleRegion,
    FlatteningProblem,
    InfeasibleRegion,
    UnboundedRegion,
    check_external_certificate,
    check_external_flatten_certificate,
    check_internal_certificate,
    maximize_volume,
    nondominated,
    perturbed_feasible,
    solve_external_urysohn,
    solve_external_urysohn_flatten,
    solve_internal_urysohn_flatten,
    solve_vector_isoperimetric,
    trace_pareto_frontier,
    vector_isoperimetric,
)
from minkball.solvers.problems import external_flatten_region, internal_region
from minkball.support_core import (
    breadth,
    disk_support,
    is_even,
    make_grid,
    regular_polygon,
    support_of_polygon,
    symmetrize_support,
)


def square(side, grid, angle=0.0):
    s = side / 2
    c, t = np.cos(angle), np.sin(angle)
    pts = np.array([[s, s], [-s, s], [-s, -s], [s, -s]]) @ np.array([[c, t], [-t, c]])
    return support_of_polygon(pts, grid)


@pytest.fixture(autouse=True)
def certificate_warnings_are_errors():
    with warnings.catch_warnings():
        warnings.simplefilter("error", CertificateWarning)
        yield


class TestVolumeEngine:
    def test_square_is_the_only_feasible_body(self):
        g = make_grid(16)
        sq = square(2, g)
        res = maximize_volume(FeasibleRegion(g, symmetric=True, upper_body=sq,
                                             integral_breadth=(integral_breadth(sq), "=")))
        assert np.max(np.abs(res.h.values - sq.values)) <= 1e-9

    def test_disk_maximizes_area_at_fixed_breadth(self):
        g = make_grid(60)
        d = disk_support(g)
        res = maximize_volume(FeasibleRegion(g, symmetric=True, integral_breadth=(integral_breadth(d), "=")))
        assert np.max(np.abs(res.h.values - 1.0)) <= 1e-7

    def test_unbounded_and_infeasible(self):
        g = make_grid(16)
        with pytest.raises(UnboundedRegion):
            maximize_volume(FeasibleRegion(g, symmetric=True))
        with pytest.raises(InfeasibleRegion):
            maximize_volume(FeasibleRegion(g, symmetric=True, upper_body=disk_support(g),
                                           integral_breadth=(100.0, "=")))

    @pytest.mark.parametrize("seed", [0, 1])
    def test_lattice_oracle(self, seed):
        region = random_symmetric_region(np.random.default_rng(seed))
        best, _ = lattice_max_volume(region)
        assert maximize_volume(region).volume == pytest.approx(best, rel=1e-6)

    def test_matches_generic_nlp(self):
        g = make_grid(24)
        tri = support_of_polygon(regular_polygon(3, 1.0), g)
        region = internal_region(tri, 6, 1.5, 0.85)
        A, b, G, gg, _ = region.constraints
        H = region.hessian
        start = region.feasible_point()
        ref = minimize(lambda x: -0.5 * x @ H @ x, start, jac=lambda x: -H @ x, method="SLSQP",
                       constraints=[{"type": "ineq", "fun": lambda x: gg - G @ x, "jac": lambda x: -G},
                                    {"type": "eq", "fun": lambda x: A @ x - b, "jac": lambda x: A}],
                       options={"maxiter": 2000, "ftol": 1e-15})
        assert maximize_volume(region).volume == pytest.approx(-ref.fun, rel=1e-8)


class TestInternal:
    def test_big_disk_with_slack_cap(self):
        g = make_grid(60)
        c = integral_breadth(disk_support(g, 2.0))
        point, cert = solve_internal_urysohn_flatten(disk_support(g, 3.0), 15, c, 10.0)
        assert cert.passed and cert.beta == pytest.approx(0.0, abs=1e-12)
        assert np.max(np.abs(point.h.values - 2.0)) <= 1e-7

    def test_square_with_tight_cap(self):
        g = make_grid(72)
        sq = square(2, g)
        point, cert = solve_internal_urysohn_flatten(sq, 18, 0.8 * integral_breadth(sq), 1.5)
        assert cert.passed
        assert cert.beta > 0
        assert breadth(point.h, 18) == pytest.approx(1.5, abs=1e-9)
        assert is_even(point.h, 1e-9)

    def test_triangle_contacts_and_negative_control(self):
        g = make_grid(72)
        tri = support_of_polygon(regular_polygon(3, 1.0), g)
        point, cert = solve_internal_urysohn_flatten(tri, 18, 1.5, 0.8)
        assert cert.passed
        assert len(cert.details["contact_set"]) > 0
        worse = perturbed_feasible(internal_region(tri, 18, 1.5, 0.8), point.h)
        assert volume(worse) == pytest.approx(0.99 * point.volume, rel=1e-9)
        assert check_internal_certificate(worse, tri, 18).residual > 1e-5

    def test_disk_is_its_own_optimum(self):
        g = make_grid(36)
        d = disk_support(g)
        cert = check_internal_certificate(d, d, None)
        assert cert.passed
        assert cert.alpha == pytest.approx(1.0)


class TestExternal:
    def test_disk(self):
        g = make_grid(36)
        d = disk_support(g)
        h, cert = solve_external_urysohn(d, integral_breadth(d))
        assert cert.passed and cert.alpha == pytest.approx(1.0, abs=1e-9)
        assert np.max(np.abs(h.values - 1.0)) <= 1e-9

    def test_triangle_arcs(self):
        g = make_grid(72)
        tri = support_of_polygon(regular_polygon(3, 0.5), g)
        h, cert = solve_external_urysohn(tri, 1.5)
        assert cert.passed
        w = surface_measure(h, tol=1e-7).weights
        off = np.setdiff1d(np.arange(72), cert.details["contact_set"])
        assert np.allclose(w[off], cert.alpha * disk_measure(g).weights[off], rtol=1e-6)

    def test_segment_gives_two_arcs(self):
        g = make_grid(60)
        seg = support_of_polygon([[-1.0, 0.0], [1.0, 0.0]], g)
        h, cert = solve_external_urysohn(seg, 1.5 * integral_breadth(seg))
        assert cert.passed
        assert is_even(h, 1e-9)
        corners = np.flatnonzero(surface_measure(h, tol=1e-7).weights <= 1e-9)
        assert set(corners) == {0, 30}

    def test_breadth_below_body_is_infeasible(self):
        g = make_grid(36)
        d = disk_support(g)
        with pytest.raises(InfeasibleRegion):
            solve_external_urysohn(d, 0.5 * integral_breadth(d))

    def test_perturbation_fails(self):
        g = make_grid(72)
        tri = support_of_polygon(regular_polygon(3, 0.5), g)
        h, _ = solve_external_urysohn(tri, 1.5)
        region = FeasibleRegion(g, symmetric=False, lower_body=tri, integral_breadth=(1.5, "="))
        assert check_external_certificate(perturbed_feasible(region, h), tri).residual > 1e-5


class TestExternalFlatten:
    def setup_method(self):
        self.g = make_grid(72)
        self.hexagon = symmetrize_support(support_of_polygon(regular_polygon(3, 1.0), self.g))
        self.c = 1.02 * integral_breadth(self.hexagon)

    def test_slack_cap_matches_plain_solver(self):
        point, cert = solve_external_urysohn_flatten(self.hexagon, 0, self.c, 10.0)
        plain, _ = solve_external_urysohn(self.hexagon, self.c)
        assert cert.passed
        assert np.max(np.abs(point.h.values - plain.values)) <= 1e-7

    def test_tight_cap(self):
        point, cert = solve_external_urysohn_flatten(self.hexagon, 18, self.c, 1.6)
        assert cert.passed and cert.beta > 0
        assert breadth(point.h, 18) == pytest.approx(1.6, abs=1e-9)
        assert cert.details["equation_residual"] <= 1e-6

    def test_perturbation_fails(self):
        point, _ = solve_external_urysohn_flatten(self.hexagon, 18, self.c, 1.6)
        region = external_flatten_region(self.hexagon, 18, self.c, 1.6)
        worse = perturbed_feasible(region, point.h)
        assert check_external_flatten_certificate(worse, self.hexagon, 18).residual > 1e-5


class TestFrontier:
    def test_monotone_and_deterministic(self):
        g = make_grid(48)
        tri = support_of_polygon(regular_polygon(3, 1.0), g)
        problem = FlatteningProblem("internal", tri, 12, 1.5)
        front = trace_pareto_frontier(problem, [0.95, 0.8, 0.8, 0.9])
        vols = [p.volume for p in front.points]
        assert vols == sorted(vols)  # caps are swept in increasing order
        assert all(c.passed for c in front.certificates)
        assert front.points[0].h.values.tolist() == front.points[1].h.values.tolist()
        assert nondominated([front.points[0], front.points[2], front.points[3]])

    def test_infeasible_caps_are_skipped(self):
        g = make_grid(48)
        tri = support_of_polygon(regular_polygon(3, 1.0), g)
        front = trace_pareto_frontier(FlatteningProblem("internal", tri, 12, 1.5), [0.1, 0.9])
        assert len(front.points) == 1
        assert front.skipped and front.skipped[0][0] == pytest.approx(0.1)


class TestVectorIsoperimetric:
    def test_disk_scales_to_volume(self):
        g = make_grid(60)
        d = disk_support(g)
        w, cert, coeffs = solve_vector_isoperimetric([d], [1.0], 5.0)
        assert cert.passed
        assert coeffs[0] == pytest.approx(np.sqrt(5.0 / volume(d)), rel=1e-9)

    def test_triangle_gives_hexagonal_ball(self):
        g = make_grid(60)
        tri = support_of_polygon(regular_polygon(3, 1.0), g)
        res = vector_isoperimetric([tri], [1.0], 2.0)
        hexagon = surface_measure(symmetrize_support(tri)).weights
        assert np.allclose(res.measure.weights, res.coefficients[0] * hexagon, atol=1e-9)
        assert volume(res.h) == pytest.approx(2.0, rel=1e-9)

    def test_two_squares_lie_in_the_cone(self):
        g = make_grid(72)
        ys = [square(1, g), square(1, g, np.pi / 4)]
        res = vector_isoperimetric(ys, [1.0, 1.0], 3.0)
        assert res.cone_residual <= 1e-6
        assert res.objective_general == pytest.approx(res.objective_reduced, rel=1e-6)
