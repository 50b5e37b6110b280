"""Feasible regions in support-vector space.

Every region is a polyhedron ``{A x = b, G x <= g}`` in *reduced* coordinates
``x``: the full support vector is ``h = E @ x`` where ``E`` is the identity, or,
for Minkowski balls, the map that copies ``x_k`` into ``h_k`` and ``h_{k+n/2}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from ..lp import LinearProgram, solve_lp
from ..support_core import DirectionGrid, GeometryError, SupportVector, edge_length_matrix

RELATIONS = ("=", ">=", "<=")


class InfeasibleRegion(ValueError):
    pass


class UnboundedRegion(ValueError):
    pass


@dataclass
class FeasibleRegion:
    grid: DirectionGrid
    symmetric: bool = False
    lower_body: Optional[SupportVector] = None  # h >= h0 (x contains x0)
    upper_body: Optional[SupportVector] = None  # h <= h0 (x inside x0)
    integral_breadth: Optional[tuple] = None  # (value, relation)
    flatten: Optional[tuple] = None  # (direction index, cap on breadth)
    extra_linear: list = field(default_factory=list)  # (coeffs over h, relation, rhs)

    def __post_init__(self):
        for body in (self.lower_body, self.upper_body):
            if body is not None and body.grid != self.grid:
                raise GeometryError("region bodies must live on the region grid")
        if self.integral_breadth is not None:
            value, rel = self.integral_breadth
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
            self.integral_breadth = (float(value), rel)
        for coeffs, rel, _ in self.extra_linear:
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
            if np.asarray(coeffs).shape != (self.grid.n,):
                raise ValueError("extra linear constraint needs one coefficient per direction")

    # -- reduced coordinates -------------------------------------------------

    @cached_property
    def embed(self) -> np.ndarray:
        n = self.grid.n
        if not self.symmetric:
            return np.eye(n)
        m = n // 2
        E = np.zeros((n, m))
        E[np.arange(m), np.arange(m)] = 1.0
        E[np.arange(m) + m, np.arange(m)] = 1.0
        return E

    @property
    def n_reduced(self) -> int:
        return self.embed.shape[1]

    def lift(self, x) -> SupportVector:
        return SupportVector(self.grid, self.embed @ np.asarray(x, dtype=float))

    def reduce(self, h: SupportVector) -> np.ndarray:
        v = h.values
        if self.symmetric:
            return 0.5 * (v[: self.grid.half] + v[self.grid.half:])
        return v.copy()

    @cached_property
    def hessian(self) -> np.ndarray:
        """``Q`` with ``V(x) = x^T Q x / 2`` in reduced coordinates."""
        E = self.embed
        return E.T @ edge_length_matrix(self.grid) @ E

    @cached_property
    def constraints(self):
        """``(A, b, G, g, labels)`` in reduced coordinates; labels name each G row."""
        grid = self.grid
        n, E = grid.n, self.embed
        L = edge_length_matrix(grid)
        eq_rows, eq_rhs, in_rows, in_rhs, labels = [], [], [], [], []

        def add(row_h, rel, rhs, label):
            row = row_h @ E
            if rel == "=":
                eq_rows.append(row)
                eq_rhs.append(rhs)
            elif rel == "<=":
                in_rows.append(row)
                in_rhs.append(rhs)
                labels.append(label)
            else:
                in_rows.append(-row)
                in_rhs.append(-rhs)
                labels.append(label)

        span = range(grid.half) if self.symmetric else range(n)
        for i in span:
            add(-L[i], "<=", 0.0, ("valid", i))
        eye = np.eye(n)
        if self.upper_body is not None:
            h0 = self.upper_body.values
            for i in span:
                bound = h0[i] if not self.symmetric else min(h0[i], h0[(i + grid.half) % n])
                add(eye[i], "<=", bound, ("upper", i))
        if self.lower_body is not None:
            h0 = self.lower_body.values
            for i in span:
                bound = h0[i] if not self.symmetric else max(h0[i], h0[(i + grid.half) % n])
                add(eye[i], ">=", bound, ("lower", i))
        if self.integral_breadth is not None:
            value, rel = self.integral_breadth
            add(np.full(n, np.tan(np.pi / n)), rel, value, ("breadth",))
        if self.flatten is not None:
            z, cap = self.flatten
            row = eye[z % n] + eye[(z + grid.half) % n]
            if self.symmetric:
                row = 0.5 * row  # E doubles the copy
                add(row, "<=", 0.5 * cap, ("flatten", z))
            else:
                add(row, "<=", cap, ("flatten", z))
        for k, (coeffs, rel, rhs) in enumerate(self.extra_linear):
            add(np.asarray(coeffs, dtype=float), rel, float(rhs), ("extra", k))

        m = self.n_reduced
        A = np.array(eq_rows).reshape(-1, m)
        b = np.array(eq_rhs, dtype=float)
        G = np.array(in_rows).reshape(-1, m)
        g = np.array(in_rhs, dtype=float)
        return A, b, G, g, labels

    def linear_program(self, objective) -> LinearProgram:
        A, b, G, g, _ = self.constraints
        m = self.n_reduced
        return LinearProgram(
            objective,
            A=A if len(A) else None,
            b=b if len(A) else None,
            G=G if len(G) else None,
            d=g if len(G) else None,
            lower=np.full(m, -np.inf),
            upper=np.full(m, np.inf),
        )

    def violation(self, h: SupportVector) -> float:
        """Largest constraint violation of a full support vector."""
        A, b, G, g, _ = self.constraints
        if self.symmetric:
            v = h.values
            asym = float(np.max(np.abs(v[: self.grid.half] - v[self.grid.half:])))
        else:
            asym = 0.0
        x = self.reduce(h)
        r = asym
        if len(A):
            r = max(r, float(np.max(np.abs(A @ x - b))))
        if len(G):
            r = max(r, float(np.max(G @ x - g, initial=0.0)))
        return r

    def contains(self, h: SupportVector, tol: float = 1e-8) -> bool:
        scale = max(1.0, float(np.max(np.abs(h.values))))
        return self.violation(h) <= tol * scale

    def feasible_point(self, objective=None) -> np.ndarray:
        obj = np.zeros(self.n_reduced) if objective is None else objective
        sol = solve_lp(self.linear_program(obj))
        if sol.status == "infeasible":
            raise InfeasibleRegion("feasible region is empty")
        if sol.status == "unbounded":
            raise UnboundedRegion("LP over the region is unbounded")
        if not sol.ok:
            raise RuntimeError(f"region LP failed: {sol.status} ({sol.message})")
        return sol.x

    def scaled(self, t: float) -> "FeasibleRegion":
        """Region for the problem with all bodies and levels scaled by ``t > 0``."""
        return FeasibleRegion(
            self.grid,
            self.symmetric,
            None if self.lower_body is None else SupportVector(self.grid, t * self.lower_body.values),
            None if self.upper_body is None else SupportVector(self.grid, t * self.upper_body.values),
            None if self.integral_breadth is None else (t * self.integral_breadth[0], self.integral_breadth[1]),
            None if self.flatten is None else (self.flatten[0], t * self.flatten[1]),
            [(c, rel, t * r) for c, rel, r in self.extra_linear],
        )


def contact_set(h: SupportVector, x0: SupportVector, tol: float = 1e-6) -> np.ndarray:
    """Indices where the body touches ``x0``: ``|h_i - x0_i| <= tol (1 + |x0_i|)``."""
    return np.flatnonzero(np.abs(h.values - x0.values) <= tol * (1.0 + np.abs(x0.values)))


def reduced_labels(labels: Sequence) -> list:
    return list(labels)
