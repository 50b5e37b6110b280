"""Scalarized Pareto problems over Minkowski balls and their frontier sweeps.

Flattening problems use the epsilon-constraint form: the breadth in the
flattened direction is capped and the area is maximized.  The integral breadth
is pinned with an equality, which keeps the multiplier of the ball term
nonnegative in every certificate and makes the area concave on the feasible
affine hull (so the exact active-set finish applies).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Optional, Sequence

import numpy as np

from ..lp import LinearProgram, solve_lp
from ..measures import GridMeasure, integral_breadth, surface_measure, volume
from ..support_core import (
    GeometryError,
    SupportVector,
    _check_same_grid,
    breadth,
    edge_length_matrix,
    require_valid,
    symmetrize_support,
)
from .certificates import (
    CERT_TOL,
    Certificate,
    check_external_certificate,
    check_external_flatten_certificate,
    check_internal_certificate,
)
from .region import FeasibleRegion, InfeasibleRegion
from .volume import VolumeResult, active_set_finish, maximize_volume

logger = logging.getLogger(__name__)


class CertificateWarning(UserWarning):
    """A solver returned a point whose optimality certificate failed."""


@dataclass
class ParetoPoint:
    h: SupportVector
    objective_values: tuple
    scalarization: dict
    status: str = "ok"  # ok | certificate-fail | max-iter
    gap: float = 0.0

    @property
    def volume(self) -> float:
        return float(self.objective_values[0])


def _status(res: VolumeResult, cert: Certificate) -> str:
    if not res.ok:
        return "max-iter"
    if not cert.passed:
        warnings.warn(cert.summary(), CertificateWarning, stacklevel=3)
        return "certificate-fail"
    return "ok"


def internal_region(x0: SupportVector, z_idx: int, c: float, beta_cap: float) -> FeasibleRegion:
    require_valid(x0)
    return FeasibleRegion(x0.grid, symmetric=True, upper_body=x0,
                          integral_breadth=(c, "="), flatten=(int(z_idx), float(beta_cap)))


def external_flatten_region(x0: SupportVector, z_idx: int, c: float, beta_cap: float) -> FeasibleRegion:
    require_valid(x0)
    return FeasibleRegion(x0.grid, symmetric=True, lower_body=x0,
                          integral_breadth=(c, "="), flatten=(int(z_idx), float(beta_cap)))


def solve_internal_urysohn_flatten(x0: SupportVector, z_idx: int, c: float, beta_cap: float,
                                   tol: float = CERT_TOL) -> tuple[ParetoPoint, Certificate]:
    """Largest Minkowski ball inside ``x0`` with integral breadth ``c`` and ``b_z <= beta_cap``."""
    region = internal_region(x0, z_idx, c, beta_cap)
    res = maximize_volume(region)
    cert = check_internal_certificate(res.h, x0, z_idx, tol=tol)
    point = ParetoPoint(res.h, (res.volume, breadth(res.h, z_idx)),
                        {"kind": "internal", "cap": float(beta_cap), "breadth": float(c), "z": int(z_idx)},
                        _status(res, cert), res.gap)
    return point, cert


def solve_external_urysohn(x0: SupportVector, c: float,
                           tol: float = CERT_TOL) -> tuple[SupportVector, Certificate]:
    """Largest body containing ``x0`` with integral breadth ``c`` (no symmetry)."""
    require_valid(x0)
    if c < integral_breadth(x0) * (1 - 1e-12):
        raise InfeasibleRegion(f"integral breadth {c} is below that of the inner body "
                               f"({integral_breadth(x0)})")
    region = FeasibleRegion(x0.grid, lower_body=x0, integral_breadth=(c, "="))
    res = maximize_volume(region)
    cert = check_external_certificate(res.h, x0, tol=tol)
    cert.details["status"] = _status(res, cert)
    cert.details["gap"] = res.gap
    return res.h, cert


def solve_external_urysohn_flatten(x0: SupportVector, z_idx: int, c: float, beta_cap: float,
                                   tol: float = CERT_TOL) -> tuple[ParetoPoint, Certificate]:
    """Largest Minkowski ball around ``x0`` with integral breadth ``c`` and ``b_z <= beta_cap``."""
    region = external_flatten_region(x0, z_idx, c, beta_cap)
    res = maximize_volume(region)
    cert = check_external_flatten_certificate(res.h, x0, z_idx, tol=tol)
    point = ParetoPoint(res.h, (res.volume, breadth(res.h, z_idx)),
                        {"kind": "external-flatten", "cap": float(beta_cap), "breadth": float(c),
                         "z": int(z_idx)},
                        _status(res, cert), res.gap)
    return point, cert


@dataclass
class FlatteningProblem:
    kind: str  # internal | external-flatten
    x0: SupportVector
    z_idx: int
    breadth: float

    def solve(self, cap: float) -> tuple[ParetoPoint, Certificate]:
        if self.kind == "internal":
            return solve_internal_urysohn_flatten(self.x0, self.z_idx, self.breadth, cap)
        if self.kind == "external-flatten":
            return solve_external_urysohn_flatten(self.x0, self.z_idx, self.breadth, cap)
        raise ValueError(f"frontier sweep needs a flattening problem, got {self.kind!r}")


@dataclass
class Frontier:
    points: list
    certificates: list
    skipped: list = field(default_factory=list)  # (cap, reason)


def trace_pareto_frontier(problem: FlatteningProblem, caps: Sequence[float],
                          monotonic_tol: float = 1e-9) -> Frontier:
    """Epsilon-constraint sweep, sorted by cap; infeasible caps are skipped and noted."""
    points, certs, skipped = [], [], []
    for cap in sorted(float(c) for c in caps):
        try:
            p, cert = problem.solve(cap)
        except InfeasibleRegion as exc:
            logger.info("cap %.17g skipped: %s", cap, exc)
            skipped.append((cap, str(exc)))
            continue
        points.append(p)
        certs.append(cert)
    for a, b in zip(points, points[1:]):
        # a has the tighter cap: its volume cannot exceed the looser one's
        if a.volume > b.volume * (1 + monotonic_tol) + monotonic_tol:
            raise RuntimeError(f"frontier is not monotone: cap {a.scalarization['cap']} gives "
                               f"{a.volume} > {b.volume} at cap {b.scalarization['cap']}")
    return Frontier(points, certs, skipped)


def nondominated(points: Sequence[ParetoPoint], tol: float = 1e-8) -> bool:
    """No listed point has strictly larger area and strictly smaller flattened breadth."""
    for p in points:
        for q in points:
            if (q.objective_values[0] > p.objective_values[0] + tol
                    and q.objective_values[1] < p.objective_values[1] - tol):
                return False
    return True


# -- vector isoperimetric problem --------------------------------------------

def _qp_problem(Q, a):
    """Namespace in the shape ``active_set_finish`` expects: max s^T Q s / 2, a.s = 1, s >= 0."""
    m = len(a)
    return SimpleNamespace(Q=Q, A=a[None, :], b=np.array([1.0]), G=-np.eye(m), g=np.zeros(m))


def _simplex_qp(Q: np.ndarray, a: np.ndarray, max_iter: int = 5000, gap_tol: float = 1e-12):
    """Maximize ``s^T Q s / 2`` over ``{s >= 0, a.s = 1}`` where its square root is concave.

    Frank-Wolfe with closed-form vertices ``e_k / a_k`` builds the support;
    the active-set finish then solves the stationarity system exactly.
    """
    m = len(a)
    s = np.full(m, 1.0 / float(np.sum(a)))  # every atom in play: positive area
    prob = _qp_problem(Q, a)
    for it in range(max_iter):
        g = Q @ s
        k = int(np.argmax(g / a))
        v = np.zeros(m)
        v[k] = 1.0 / a[k]
        d = v - s
        val = 0.5 * s @ Q @ s
        gap = float(g @ d) / (2 * np.sqrt(max(val, 1e-300)))
        if gap <= gap_tol * max(1.0, np.sqrt(val)):
            break
        if it and it % 25 == 0:
            sf, ok = active_set_finish(prob, s)
            if ok:
                gf = Q @ sf
                if float(np.max(gf / a) - gf @ sf) <= gap_tol * max(1.0, 0.5 * sf @ Q @ sf):
                    return sf, True
        slope, curv = float(g @ d), float(d @ Q @ d)
        t = 1.0 if curv >= 0 else min(1.0, -slope / curv)
        s = s + t * d
    sf, ok = active_set_finish(prob, s)
    gf = Q @ sf
    converged = ok and float(np.max(gf / a) - gf @ sf) <= 1e-9 * max(1.0, 0.5 * sf @ Q @ sf)
    return (sf if ok else s), converged


def cone_residual(columns: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Nonnegative fit ``min_{c >= 0} ||columns @ c - target||_inf`` as an LP."""
    n, m = columns.shape
    # variables (c, t); maximize -t; |columns c - target| <= t
    G = np.vstack([np.hstack([columns, -np.ones((n, 1))]), np.hstack([-columns, -np.ones((n, 1))])])
    dvec = np.concatenate([target, -target])
    obj = np.zeros(m + 1)
    obj[-1] = -1.0
    sol = solve_lp(LinearProgram(obj, G=G, d=dvec))
    if not sol.ok:
        raise RuntimeError(f"cone-fit LP failed: {sol.status}")
    return float(sol.x[-1]), sol.x[:m]


@dataclass
class VectorIsoResult:
    measure: GridMeasure
    h: SupportVector
    coefficients: np.ndarray
    objective_general: float
    objective_reduced: float
    cone_residual: float
    coefficient_residual: float
    converged: bool


def _measure_pinv(grid) -> np.ndarray:
    """Map a closed measure to the support vector of its Steiner-centred body."""
    return np.linalg.pinv(edge_length_matrix(grid), rcond=1e-10, hermitian=True)


def solve_vector_isoperimetric(ys: Sequence[SupportVector], lam, v0: float,
                               tol: float = 1e-6) -> tuple[GridMeasure, Certificate, np.ndarray]:
    """Minimize ``sum_i lam_i V1(x, y_i)`` over Minkowski balls of area ``v0``.

    Two independent routes: a general program over all symmetric measures, and
    the reduced program over ``sum_j alpha_j Sym(mu(y_j))``.  The certificate
    residual is the worse of their disagreements.
    """
    res = vector_isoperimetric(ys, lam, v0, tol)
    scale = max(1.0, float(np.max(res.measure.weights)))
    obj_gap = abs(res.objective_general - res.objective_reduced) / max(abs(res.objective_reduced), 1e-300)
    cert = Certificate(
        alpha=float(np.sum(res.coefficients)),
        beta=0.0,
        witness_measure=res.measure,
        residual=max(res.cone_residual / scale, res.coefficient_residual / scale, obj_gap),
        contact_violation=0.0,
        tol=tol,
        kind="vector-isoperimetric",
        details={"objective_general": res.objective_general, "objective_reduced": res.objective_reduced,
                 "cone_residual": res.cone_residual, "coefficient_residual": res.coefficient_residual,
                 "objective_gap": obj_gap, "converged": res.converged},
    )
    if not cert.passed:
        warnings.warn(cert.summary(), CertificateWarning, stacklevel=2)
    return res.measure, cert, res.coefficients


def vector_isoperimetric(ys: Sequence[SupportVector], lam, v0: float, tol: float = 1e-6) -> VectorIsoResult:
    ys = list(ys)
    if not ys:
        raise GeometryError("vector isoperimetric problem needs at least one body")
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (len(ys),) or np.any(lam <= 0):
        raise GeometryError("weights must be positive, one per body")
    if not v0 > 0:
        raise GeometryError("target area must be positive")
    grid = ys[0].grid
    for y in ys:
        _check_same_grid(ys[0], y)
        require_valid(y)
        if surface_measure(y).mass <= 0:
            raise GeometryError("generator bodies must not be points")
    n, half = grid.n, grid.half
    H = sum(l * y.values for l, y in zip(lam, ys))
    a = 0.5 * (H[:half] + H[half:])  # f(w) = sum_k s_k a_k for w = (s, s)
    P = _measure_pinv(grid)
    E = np.vstack([np.eye(half), np.eye(half)])
    Qs = E.T @ P @ E

    # (a) general program over symmetric measures
    s, converged = _simplex_qp(Qs, a)
    s = np.maximum(s, 0.0)
    v_s = 0.5 * s @ Qs @ s
    w_a = np.concatenate([s, s]) * np.sqrt(v0 / v_s)
    f_a = 0.5 * float(H @ w_a)

    # (b) reduced program over the cone of symmetrized generator measures
    M = np.column_stack([symmetrize_support_measure(y) for y in ys])
    QM = M.T @ P @ M
    aM = 0.5 * (H @ M)
    if np.max(np.abs(QM)) <= 0:
        raise GeometryError("generator bodies span no area")
    alpha, _ = _simplex_qp(QM, aM)
    alpha = np.maximum(alpha, 0.0)
    v_b = 0.5 * alpha @ QM @ alpha
    if v_b <= 1e-14 * max(1.0, float(np.max(np.abs(QM)))):
        raise GeometryError("generator bodies are degenerate: their symmetrizations have no area")
    alpha = alpha * np.sqrt(v0 / v_b)
    w_b = M @ alpha
    f_b = 0.5 * float(H @ w_b)

    cone_res, _ = cone_residual(M, w_a)
    coef_res = float(np.max(np.abs(w_b - w_a)))
    measure = GridMeasure(grid, w_a)
    h = SupportVector(grid, P @ w_a)
    return VectorIsoResult(measure, h, alpha, f_a, f_b, cone_res, coef_res, converged)


def symmetrize_support_measure(y: SupportVector) -> np.ndarray:
    """Weights of ``Sym(mu(y))``, equal to the measure of the central symmetral."""
    return surface_measure(symmetrize_support(y)).weights


def perturbed_feasible(region: FeasibleRegion, h: SupportVector, loss: float = 0.01,
                       seed: int = 0, tries: int = 50) -> SupportVector:
    """A feasible body on a segment from ``h`` towards a random vertex, with area ``(1 - loss) V(h)``.

    The region is convex, so every point of the segment is feasible; the area
    is quadratic along it, which gives the step in closed form.
    """
    rng = np.random.default_rng(seed)
    x = region.reduce(h)
    Q = region.hessian
    target = (1.0 - loss) * 0.5 * float(x @ Q @ x)
    for _ in range(tries):
        q = region.feasible_point(rng.normal(size=region.n_reduced))
        d = q - x
        a2, a1, a0 = 0.5 * float(d @ Q @ d), float(x @ Q @ d), 0.5 * float(x @ Q @ x) - target
        if 0.5 * float(q @ Q @ q) >= target:
            continue
        # a2 t^2 + a1 t + a0 = 0 on (0, 1]; a0 > 0 and the value at t = 1 is < 0
        roots = np.roots([a2, a1, a0]) if abs(a2) > 1e-300 else np.array([-a0 / a1])
        roots = roots[np.isreal(roots)].real
        roots = roots[(roots > 0) & (roots <= 1)]
        if len(roots):
            return region.lift(x + float(np.min(roots)) * d)
    raise RuntimeError("no random vertex of the region gives the requested area loss")
