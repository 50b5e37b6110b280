"""Atomic Alexandrov measures on the direction grid.

In the plane the surface-area measure of a grid polygon puts each edge length
at its outer normal, so ``surface_measure`` is the fixed linear map ``h -> L h``
and the canonical pairing ``<f, mu> = (1/2) sum f_i w_i`` gives mixed areas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .support_core import (
    VALIDITY_TOL,
    DirectionGrid,
    GeometryError,
    Polygon,
    SupportVector,
    _check_same_grid,
    as_values,
    canonical_translate,
    convex_envelope,
    edge_lengths,
    is_valid_support,
    polygon_area,
    reconstruct_polygon,
    require_valid,
)

DIMENSION = 2
NEG_CLAMP = 1e-12
CLOSURE_TOL = 1e-9


@dataclass(frozen=True)
class GridMeasure:
    """Nonnegative atomic measure; weight ``w_i`` sits at direction ``u_i``.

    Closure (zero first moment) is not enforced here because majorization and
    certificates handle non-closed positive measures too; see ``is_closed`` and
    ``require_alexandrov``.
    """

    grid: DirectionGrid
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.grid.n,):
            raise GeometryError(f"measure needs {self.grid.n} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise GeometryError("measure weights must be finite")
        scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
        if np.any(w < -NEG_CLAMP * scale):
            i = int(np.argmin(w))
            raise GeometryError(f"negative weight {w[i]:.3e} at index {i}")
        w = np.maximum(w, 0.0)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def moment(self) -> np.ndarray:
        return self.grid.directions.T @ self.weights

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def is_closed(self, tol: float = CLOSURE_TOL) -> bool:
        return bool(np.linalg.norm(self.moment) <= tol * max(self.mass, 1e-300) or self.mass == 0.0)

    def is_nondegenerate(self) -> bool:
        """True if the support is not contained in a closed half-circle boundary pair."""
        idx = self.support
        if len(idx) < 3:
            return False
        gaps = np.diff(np.concatenate([idx, [idx[0] + self.n]]))
        # positive hull is the plane iff every angular gap is below pi
        return bool(np.max(gaps) < self.grid.half)

    def __add__(self, other: "GridMeasure") -> "GridMeasure":
        return blaschke_sum(self, other)

    def scaled(self, t: float) -> "GridMeasure":
        return GridMeasure(self.grid, t * self.weights)


@dataclass(frozen=True)
class DiracPair:
    """Weighted pair of opposite atoms ``weight * (e_i + e_{-i})``."""

    index: int
    weight: float

    def __post_init__(self):
        if self.weight < 0:
            raise GeometryError("Dirac pair weight must be nonnegative")

    def on(self, grid: DirectionGrid) -> GridMeasure:
        w = np.zeros(grid.n)
        w[self.index % grid.n] += self.weight
        w[(self.index + grid.half) % grid.n] += self.weight
        return GridMeasure(grid, w)


def zero_measure(grid: DirectionGrid) -> GridMeasure:
    return GridMeasure(grid, np.zeros(grid.n))


def disk_measure(grid: DirectionGrid, radius: float = 1.0) -> GridMeasure:
    """Measure of the grid disk ``h = radius``: uniform ``2 r tan(pi/n)``."""
    return GridMeasure(grid, np.full(grid.n, 2.0 * radius * np.tan(np.pi / grid.n)))


def surface_measure(h: SupportVector, tol: float = VALIDITY_TOL) -> GridMeasure:
    require_valid(h, tol)
    w = edge_lengths(h)
    # rounding noise of the three-term formula is ~eps * |h| / sin(delta)
    noise = 1e-12 * max(1.0, float(np.max(np.abs(h.values)))) / np.sin(h.grid.delta)
    w[w <= noise] = 0.0
    return GridMeasure(h.grid, w)


def require_alexandrov(w: GridMeasure) -> None:
    if not w.is_closed():
        m = np.linalg.norm(w.moment)
        raise GeometryError(f"measure is not closed: |first moment| = {m:.3e}")
    if not w.is_nondegenerate():
        raise GeometryError("measure is concentrated on a line: body would be lower-dimensional")


def chain_vertices(w: GridMeasure) -> np.ndarray:
    """Vertices reached by walking edges ``w_i * rot90(u_i)`` in angular order."""
    u = w.grid.directions
    tangents = np.column_stack([-u[:, 1], u[:, 0]])
    return np.cumsum(w.weights[:, None] * tangents, axis=0)


def body_from_measure(w: GridMeasure) -> SupportVector:
    """Solve the planar Minkowski problem: the canonical body with measure ``w``."""
    require_alexandrov(w)
    p = chain_vertices(w)
    # the endpoint of edge k lies on the supporting line with normal u_k
    h = np.einsum("ij,ij->i", p, w.grid.directions)
    return canonical_translate(SupportVector(w.grid, h))


def pairing(f, mu: GridMeasure) -> float:
    """Canonical form ``<f, mu> = (1/N) sum f_i w_i`` with ``N = 2``."""
    if isinstance(f, SupportVector):
        _check_same_grid(f, mu)
    vals = as_values(f)
    weights = mu.weights if isinstance(mu, GridMeasure) else np.asarray(mu, dtype=float)
    if vals.shape != weights.shape:
        raise GeometryError("pairing needs a function and a measure on the same grid")
    return float(vals @ weights) / DIMENSION


def mixed_volume(y: SupportVector, x: SupportVector) -> float:
    """``V1(y, x) = <h_x, mu(y)>``; symmetric in the plane (mixed area)."""
    return pairing(x, surface_measure(y))


def volume(h, grid: DirectionGrid | None = None) -> float:
    """Area ``<h, mu(h)>``; raw grid functions are replaced by their envelope first."""
    if not isinstance(h, SupportVector):
        if grid is None:
            raise GeometryError("volume of a raw array needs its grid")
        h = SupportVector(grid, h)
    if not is_valid_support(h):
        h = convex_envelope(h.values, h.grid)
    return pairing(h, surface_measure(h))


def shoelace_volume(h: SupportVector) -> float:
    return polygon_area(reconstruct_polygon(h).vertices)


def blaschke_sum(w1: GridMeasure, w2: GridMeasure) -> GridMeasure:
    grid = _check_same_grid(w1, w2)
    return GridMeasure(grid, w1.weights + w2.weights)


def symmetrize_measure(w: GridMeasure) -> GridMeasure:
    return GridMeasure(w.grid, 0.5 * (w.weights + np.roll(w.weights, -w.grid.half)))


def integral_breadth(h: SupportVector) -> float:
    """``<h, mu(disk)>`` for the grid disk, i.e. ``tan(pi/n) * sum h_i``."""
    return float(np.tan(np.pi / h.n) * np.sum(h.values))


def integral_breadth_vector(grid: DirectionGrid) -> np.ndarray:
    return np.full(grid.n, np.tan(np.pi / grid.n))


def polygon_of_measure(w: GridMeasure) -> Polygon:
    return reconstruct_polygon(body_from_measure(w))
