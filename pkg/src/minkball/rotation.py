"""Bodies of revolution generated by axis-symmetric planar profiles.

A profile symmetric about the line through the origin along ``u_axis`` sweeps
a solid when rotated about that line.  Its 3D support function in a direction
at angle ``psi`` from the axis equals the profile's support function at the
planar direction with the same angle, which reduces every 3D quantity used
here to one-dimensional integrals over ``psi in [0, pi]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .support_core import GeometryError, SupportVector, breadth, reconstruct_polygon

SYMMETRY_TOL = 1e-9
LENS_TOL = 1e-3


@dataclass(frozen=True)
class RevolutionBody:
    profile: SupportVector
    axis_index: int

    def __post_init__(self):
        n = self.profile.n
        if not 0 <= int(self.axis_index) < n:
            raise GeometryError(f"axis index {self.axis_index} out of range for n={n}")
        object.__setattr__(self, "axis_index", int(self.axis_index))
        err = axis_asymmetry(self.profile, self.axis_index)
        scale = max(1.0, float(np.max(np.abs(self.profile.values))))
        if err > SYMMETRY_TOL * scale:
            raise GeometryError(f"profile is not symmetric about the axis (defect {err:.3e})")

    def meridian(self) -> np.ndarray:
        """Support values at angles ``0, D, ..., pi`` measured from the axis."""
        n, a = self.profile.n, self.axis_index
        return self.profile.values[(a + np.arange(n // 2 + 1)) % n]


def axis_asymmetry(h: SupportVector, axis_index: int) -> float:
    n = h.n
    k = np.arange(n)
    mirrored = h.values[(2 * axis_index - k) % n]
    return float(np.max(np.abs(h.values - mirrored)))


def _profile_in_axis_frame(b: RevolutionBody) -> np.ndarray:
    """Profile vertices with the axis rotated onto the vertical line ``x = 0``."""
    verts = reconstruct_polygon(b.profile).vertices
    theta = b.profile.grid.angles[b.axis_index]
    rot = np.pi / 2 - theta
    c, s = np.cos(rot), np.sin(rot)
    return verts @ np.array([[c, s], [-s, c]])


def _clip_right(verts: np.ndarray) -> np.ndarray:
    """Part of a convex polygon in the half-plane ``x >= 0`` (Sutherland-Hodgman, one edge)."""
    out = []
    m = len(verts)
    for i in range(m):
        p, q = verts[i], verts[(i + 1) % m]
        pin, qin = p[0] >= 0, q[0] >= 0
        if pin:
            out.append(p)
        if pin != qin:
            t = p[0] / (p[0] - q[0])
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def revolve_volume(b: RevolutionBody) -> float:
    """Volume of the solid swept by the profile; exact for the polygonal profile.

    With the axis vertical, ``V = pi * oint x^2 dy`` over the boundary of the
    half-profile ``x >= 0`` (Green's theorem applied to ``2 pi x dA``).
    """
    verts = _profile_in_axis_frame(b)
    if len(verts) < 3:
        return 0.0
    half = _clip_right(verts)
    if len(half) < 3:
        return 0.0
    x, y = half[:, 0], half[:, 1]
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    integral = np.sum((y2 - y) * (x * x + x * x2 + x2 * x2)) / 3.0
    return float(np.pi * abs(integral))


def _trapezoid(f: np.ndarray, dx: float) -> float:
    return float(dx * (np.sum(f) - 0.5 * (f[0] + f[-1])))


def revolve_mean_width(b: RevolutionBody) -> float:
    """Mean width ``int_0^pi h(psi) sin(psi) dpsi`` by the composite trapezoid rule on the grid."""
    n = b.profile.n
    psi = np.arange(n // 2 + 1) * (2.0 * np.pi / n)
    return _trapezoid(b.meridian() * np.sin(psi), 2.0 * np.pi / n)


def axial_breadth(b: RevolutionBody) -> float:
    return breadth(b.profile, b.axis_index)


# -- spherical lens ------------------------------------------------------------

@dataclass
class LensReport:
    cap_angle: float
    alpha: float
    radius: float
    volume: float
    lhs: float
    rhs: float
    residual: float
    resolution: int
    tol: float = LENS_TOL

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def _piecewise_trapezoid(f, a: float, b: float, m: int) -> float:
    if b <= a:
        return 0.0
    x = np.linspace(a, b, m + 1)
    return _trapezoid(f(x), (b - a) / m)


def lens_geometry(cap_angle: float) -> tuple[float, float, float]:
    """Radius, cap height and closed-form volume of the lens around the unit disk.

    The lens is the intersection of two balls of radius ``R = 1 / sin(theta)``
    whose spheres pass through the unit circle; each cap spans polar angles up
    to ``theta``.
    """
    if not 0.0 < cap_angle <= np.pi / 2:
        raise GeometryError("cap angle must lie in (0, pi/2]")
    R = 1.0 / np.sin(cap_angle)
    t = R * (1.0 - np.cos(cap_angle))
    volume = 2.0 * np.pi * t * t * (3.0 * R - t) / 3.0
    return R, t, volume


def _lens_support(cap_angle: float):
    R = 1.0 / np.sin(cap_angle)
    c = np.cos(cap_angle)

    def h(phi):
        phi = np.asarray(phi, dtype=float)
        polar = np.minimum(phi, np.pi - phi)
        return np.where(polar <= cap_angle, R - R * c * np.cos(polar), np.sin(phi))
    return h


def _criterion_terms(h, volume: float, cap_angle: float, alpha: float, m: int):
    """``V + (1/3) int h d mu*`` and ``alpha V1(ball, x)`` with ``mu*`` on the band.

    ``mu*`` is ``alpha`` times the unit-sphere area element on the band of
    polar angles in ``(theta, pi - theta)``; integrals use ``dsigma = 2 pi sin(phi) dphi``.
    """
    g = lambda phi: h(phi) * np.sin(phi)
    band = _piecewise_trapezoid(g, cap_angle, np.pi - cap_angle, m)
    caps = _piecewise_trapezoid(g, 0.0, cap_angle, m) + _piecewise_trapezoid(g, np.pi - cap_angle, np.pi, m)
    lhs = volume + alpha * 2.0 * np.pi * band / 3.0
    rhs = alpha * 2.0 * np.pi * (band + caps) / 3.0
    return lhs, rhs, band, caps


def solve_lens_alpha(cap_angle: float, n: int = 720) -> float:
    """``alpha`` solving the energy identity for the lens, by quadrature at resolution ``n``."""
    _, _, V = lens_geometry(cap_angle)
    _, _, _, caps = _criterion_terms(_lens_support(cap_angle), V, cap_angle, 1.0, n // 2)
    return V / (2.0 * np.pi * caps / 3.0)


def lens_criterion_check(cap_angle: float, alpha_bar: Optional[float] = None, n: int = 720,
                         body: Optional[RevolutionBody] = None, tol: float = LENS_TOL) -> LensReport:
    """Residual of ``V(x) + (1/3) int x dmu = alpha V1(ball, x)`` for the lens (or ``body``).

    ``alpha_bar`` defaults to the squared lens radius, the value under which
    ``mu`` is the band part of the surface measure of the radius-``R`` ball.
    ``body`` replaces the lens by another solid of revolution, which is how
    negative controls are evaluated.
    """
    R, _, V = lens_geometry(cap_angle)
    alpha = R * R if alpha_bar is None else float(alpha_bar)
    if body is None:
        h = _lens_support(cap_angle)
        volume = V
    else:
        mer = body.meridian()
        psi = np.linspace(0.0, np.pi, len(mer))
        h = lambda phi: np.interp(phi, psi, mer)
        volume = revolve_volume(body)
    lhs, rhs, _, _ = _criterion_terms(h, volume, cap_angle, alpha, n // 2)
    residual = abs(lhs - rhs) / max(abs(volume), 1e-300)
    return LensReport(cap_angle, alpha, R, volume, lhs, rhs, residual, n, tol)


# -- transfer spot check ---------------------------------------------------------

@dataclass
class TransferReport:
    checked: int
    excluded: int
    dominators: list = field(default_factory=list)
    volume: float = 0.0
    axial: float = 0.0
    mean_width: float = 0.0
    planar_only_dominators: int = 0  # dominators if the mean-width filter were skipped

    @property
    def passed(self) -> bool:
        return not self.dominators


def reflect_across_axis(h: SupportVector, axis_index: int) -> SupportVector:
    k = np.arange(h.n)
    return SupportVector(h.grid, h.values[(2 * axis_index - k) % h.n])


def dominates(a: tuple, b: tuple, tol: float = 1e-8) -> bool:
    """``a`` Pareto-dominates ``b`` in (volume up, breadth down)."""
    scale_v = max(1.0, abs(b[0]))
    scale_b = max(1.0, abs(b[1]))
    no_worse = a[0] >= b[0] - tol * scale_v and a[1] <= b[1] + tol * scale_b
    better = a[0] > b[0] + tol * scale_v or a[1] < b[1] - tol * scale_b
    return no_worse and better


def transfer_spot_check(optimal_2d: SupportVector, z_idx: int, region, trials: int = 200,
                        seed: int = 0, candidates: Sequence[SupportVector] = (),
                        tol: float = 1e-8) -> TransferReport:
    """Sample feasible axis-symmetric perturbations of a planar optimum and look for 3D dominators.

    Perturbations are ``(1 - s) h + s q`` with ``q`` a random vertex of
    ``region`` averaged with its mirror image, so they stay feasible in the
    plane and symmetric.  A perturbation is a feasible solid only if its
    mean width does not exceed the optimum's (the solid problem pins mean
    width, not the planar integral breadth); the rest are counted in
    ``excluded``, together with extra ``candidates`` that fail the filter.
    """
    base = RevolutionBody(optimal_2d, z_idx)
    ref = (revolve_volume(base), axial_breadth(base))
    ref_width = revolve_mean_width(base)
    rng = np.random.default_rng(seed)
    report = TransferReport(0, 0, volume=ref[0], axial=ref[1], mean_width=ref_width)

    def consider(h: SupportVector):
        scale = max(1.0, float(np.max(np.abs(h.values))))
        if not region.contains(h) or axis_asymmetry(h, z_idx) > SYMMETRY_TOL * scale:
            report.excluded += 1
            return
        body = RevolutionBody(h, z_idx)
        point = (revolve_volume(body), axial_breadth(body))
        dominant = dominates(point, ref, tol)
        report.planar_only_dominators += int(dominant)
        if revolve_mean_width(body) > ref_width * (1 + tol):
            report.excluded += 1
            return
        report.checked += 1
        if dominant:
            report.dominators.append(point)

    for cand in candidates:
        consider(cand)
    for _ in range(trials):
        q = region.lift(region.feasible_point(rng.normal(size=region.n_reduced)))
        q = SupportVector(q.grid, 0.5 * (q.values + reflect_across_axis(q, z_idx).values))
        s = float(10.0 ** rng.uniform(-3, 0))
        consider(SupportVector(q.grid, (1 - s) * optimal_2d.values + s * q.values))
    return report
