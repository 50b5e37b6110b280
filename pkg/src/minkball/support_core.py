"""Convex bodies in the plane as support vectors on a direction grid.

A body is stored by its support values ``h_i = max_{x in K} (x, u_i)`` on an
antipodally closed grid of ``n`` unit directions.  A vector is a valid support
vector exactly when every discrete edge length

    l_i = (h_{i-1} - 2 h_i cos(delta) + h_{i+1}) / sin(delta)

is nonnegative; ``l_i`` is then the length of the polygon edge with outer
normal ``u_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

VALIDITY_TOL = 1e-9


class GeometryError(ValueError):
    """Rejected geometric input (bad grid, invalid body, grid mismatch)."""


@dataclass(frozen=True)
class DirectionGrid:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise GeometryError(f"grid size must be an integer, got {self.n!r}")
        if self.n % 2:
            raise GeometryError(f"grid size must be even, got {self.n}")
        if self.n < 4:
            raise GeometryError(f"grid size must be at least 4, got {self.n}")

    @property
    def delta(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def half(self) -> int:
        return self.n // 2

    @cached_property
    def angles(self) -> np.ndarray:
        return self.delta * np.arange(self.n)

    @cached_property
    def directions(self) -> np.ndarray:
        a = self.angles
        u = np.column_stack([np.cos(a), np.sin(a)])
        # exact axis values keep n=4 and n=8 examples free of 1e-17 noise
        u[np.abs(u) < 1e-15] = 0.0
        return u

    def antipode(self, i):
        return (np.asarray(i) + self.half) % self.n

    def index_of_angle(self, theta: float, snap_tol: float | None = None) -> int:
        """Nearest grid index to angle ``theta``; raise if farther than ``snap_tol``."""
        k = int(np.round(theta / self.delta)) % self.n
        if snap_tol is not None:
            err = abs((theta - k * self.delta + np.pi) % (2 * np.pi) - np.pi)
            if err > snap_tol:
                raise GeometryError(f"angle {theta} is {err:.3g} rad off the grid")
        return k


def make_grid(n: int) -> DirectionGrid:
    return DirectionGrid(int(n) if isinstance(n, (np.integer,)) else n)


@dataclass(frozen=True)
class SupportVector:
    grid: DirectionGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise GeometryError(
                f"support vector needs {self.grid.n} values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise GeometryError("support values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.grid.n

    def __len__(self):
        return self.grid.n


@dataclass(frozen=True)
class Polygon:
    """Convex polygon with counterclockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    def is_convex(self, tol: float = VALIDITY_TOL) -> bool:
        v = self.vertices
        if len(v) < 3:
            return True
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        return bool(np.all(cross >= -tol))

    def contains(self, z, tol: float = 1e-9) -> bool:
        v = self.vertices
        if len(v) < 3:
            return False
        e = np.roll(v, -1, axis=0) - v
        rel = np.asarray(z, dtype=float) - v
        cross = e[:, 0] * rel[:, 1] - e[:, 1] * rel[:, 0]
        scale = np.linalg.norm(e, axis=1)
        return bool(np.all(cross >= -tol * np.maximum(scale, 1.0)))


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _check_same_grid(*bodies) -> DirectionGrid:
    grid = bodies[0].grid
    for b in bodies[1:]:
        if b.grid != grid:
            raise GeometryError(f"grid mismatch: n={grid.n} vs n={b.grid.n}")
    return grid


def edge_lengths_raw(values: np.ndarray, grid: DirectionGrid) -> np.ndarray:
    """Discrete edge lengths of an arbitrary grid function (may be negative)."""
    h = np.asarray(values, dtype=float)
    d = grid.delta
    return (np.roll(h, 1) + np.roll(h, -1) - 2.0 * np.cos(d) * h) / np.sin(d)


def edge_lengths(h: SupportVector) -> np.ndarray:
    return edge_lengths_raw(h.values, h.grid)


def edge_length_matrix(grid: DirectionGrid) -> np.ndarray:
    """Dense symmetric circulant ``L`` with ``edge_lengths(h) = L @ h``."""
    n = grid.n
    d = grid.delta
    L = np.zeros((n, n))
    idx = np.arange(n)
    L[idx, idx] = -2.0 * np.cos(d) / np.sin(d)
    L[idx, (idx - 1) % n] += 1.0 / np.sin(d)
    L[idx, (idx + 1) % n] += 1.0 / np.sin(d)
    return L


def support_of_polygon(points, grid: DirectionGrid) -> SupportVector:
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(p) == 0:
        raise GeometryError("support of an empty point set is undefined")
    return SupportVector(grid, np.max(p @ grid.directions.T, axis=0))


def is_valid_support(h: SupportVector, tol: float = VALIDITY_TOL) -> bool:
    return bool(np.all(edge_lengths(h) >= -tol))


def require_valid(h: SupportVector, tol: float = VALIDITY_TOL) -> None:
    ell = edge_lengths(h)
    if np.any(ell < -tol):
        i = int(np.argmin(ell))
        raise GeometryError(
            f"not a support vector: edge length {ell[i]:.3e} at index {i}"
        )


def minkowski_combine(a: float, h1: SupportVector, b: float, h2: SupportVector) -> SupportVector:
    if a < 0 or b < 0:
        raise GeometryError("Minkowski combination needs nonnegative coefficients")
    grid = _check_same_grid(h1, h2)
    return SupportVector(grid, a * h1.values + b * h2.values)


def scale(t: float, h: SupportVector) -> SupportVector:
    return SupportVector(h.grid, t * h.values)


def translate(h: SupportVector, t) -> SupportVector:
    return SupportVector(h.grid, h.values + h.grid.directions @ np.asarray(t, dtype=float))


def steiner_point(h: SupportVector) -> np.ndarray:
    """First Fourier mode of ``h``: the discrete Steiner point."""
    return (2.0 / h.n) * (h.grid.directions.T @ h.values)


def canonical_translate(h: SupportVector) -> SupportVector:
    """Representative of the translation class with Steiner point at the origin."""
    return translate(h, -steiner_point(h))


def symmetrize_support(h: SupportVector) -> SupportVector:
    v = h.values
    return SupportVector(h.grid, 0.5 * (v + np.roll(v, -h.grid.half)))


def is_even(h: SupportVector, tol: float = 1e-12) -> bool:
    v = h.values
    return bool(np.max(np.abs(v - np.roll(v, -h.grid.half))) <= tol * max(1.0, np.max(np.abs(v))))


def breadth(h: SupportVector, i: int) -> float:
    if not 0 <= int(i) < h.n:
        raise GeometryError(f"direction index {i} out of range for n={h.n}")
    return float(h.values[i] + h.values[(int(i) + h.grid.half) % h.n])


def gauge(h: SupportVector, z) -> float:
    """Minkowski functional of the body at ``z``; the body must contain 0 inside."""
    if np.any(h.values <= 0):
        raise GeometryError("gauge needs the origin in the interior (all h_i > 0)")
    proj = h.grid.directions @ np.asarray(z, dtype=float)
    return float(max(0.0, np.max(proj / h.values)))


def disk_support(grid: DirectionGrid, radius: float = 1.0) -> SupportVector:
    return SupportVector(grid, np.full(grid.n, float(radius)))


def point_support(grid: DirectionGrid, p) -> SupportVector:
    return support_of_polygon([p], grid)


def _line_intersections(h: np.ndarray, grid: DirectionGrid) -> np.ndarray:
    # vertex i: lines (x,u_i)=h_i and (x,u_{i+1})=h_{i+1}
    a = grid.angles
    a1 = np.roll(a, -1)
    h1 = np.roll(h, -1)
    s = np.sin(grid.delta)
    x = (h * np.sin(a1) - h1 * np.sin(a)) / s
    y = (h1 * np.cos(a) - h * np.cos(a1)) / s
    return np.column_stack([x, y])


def reconstruct_polygon(h: SupportVector, tol: float = VALIDITY_TOL) -> Polygon:
    require_valid(h, tol)
    verts = _line_intersections(h.values, h.grid)
    ell = edge_lengths(h)
    # vertex i starts edge i+1
    keep = np.roll(ell, -1) > tol
    if not np.any(keep):
        return Polygon(verts[:1])
    return Polygon(verts[keep])


def convex_envelope(f: Sequence[float], grid: DirectionGrid) -> SupportVector:
    """Pointwise largest valid support vector below ``f``.

    Solved as the LP ``max sum(g)`` s.t. ``g <= f`` and all edge lengths of
    ``g`` nonnegative.  When no body fits under ``f`` the problem is solved for
    ``f + C`` and ``C`` is subtracted afterwards.
    """
    from .lp import LinearProgram, solve_lp

    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n,):
        raise GeometryError(f"envelope input needs {grid.n} values")
    n = grid.n
    L = edge_length_matrix(grid)

    def _solve(target):
        prog = LinearProgram(
            objective=np.ones(n),
            G=-L,
            d=np.zeros(n),
            lower=np.full(n, -np.inf),
            upper=target,
        )
        return solve_lp(prog)

    sol = _solve(f)
    shift = 0.0
    if sol.status == "infeasible":
        shift = max(0.0, -float(np.min(f))) + 1.0 + float(np.ptp(f))
        sol = _solve(f + shift)
    if sol.status != "optimal":
        raise GeometryError(f"convex envelope LP failed: {sol.status}")
    g = _snap_envelope(np.minimum(sol.x, f + shift), f + shift, grid) - shift
    return SupportVector(grid, g)


def _snap_envelope(g: np.ndarray, f: np.ndarray, grid: DirectionGrid) -> np.ndarray:
    # the envelope is the support of the polygon {(x,u_i) <= f_i}; recompute its
    # values from the tight lines so the LP's 1e-9 noise does not leak out
    tight = np.abs(g - f) <= 1e-7 * (1.0 + np.abs(f))
    idx = np.flatnonzero(tight)
    if len(idx) < 2:
        return g
    u = grid.directions
    verts = []
    m = len(idx)
    for k in range(m):
        i, j = idx[k], idx[(k + 1) % m]
        A = np.array([u[i], u[j]])
        det = np.linalg.det(A)
        if abs(det) < 1e-12:
            continue
        verts.append(np.linalg.solve(A, [f[i], f[j]]))
    if not verts:
        return g
    verts = np.array(verts)
    # keep only vertices that are inside every half-plane
    inside = np.all(verts @ u.T <= f + 1e-9 * (1.0 + np.abs(f)), axis=1)
    if not np.any(inside):
        return g
    snapped = np.max(verts[inside] @ u.T, axis=0)
    if np.max(np.abs(snapped - g)) <= 1e-6 * (1.0 + np.max(np.abs(f))):
        return np.minimum(snapped, f)
    return g


def resample_support(support_fn, grid: DirectionGrid) -> SupportVector:
    """Evaluate an exact support function (callable on unit vectors) on the grid."""
    return SupportVector(grid, np.array([support_fn(u) for u in grid.directions], dtype=float))


def regular_polygon(m: int, circumradius: float = 1.0, phase: float = np.pi / 2, center=(0.0, 0.0)) -> np.ndarray:
    t = phase + 2.0 * np.pi * np.arange(m) / m
    return np.column_stack([np.cos(t), np.sin(t)]) * circumradius + np.asarray(center, dtype=float)


def as_values(f) -> np.ndarray:
    if isinstance(f, SupportVector):
        return f.values
    return np.asarray(f, dtype=float)


def bodies_grid(bodies: Iterable[SupportVector]) -> DirectionGrid:
    return _check_same_grid(*list(bodies))
