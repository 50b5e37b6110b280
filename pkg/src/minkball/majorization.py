"""Linear majorization of atomic measures and the dual-cone tests built on it.

``mu >> nu`` holds when ``mu`` splits into pieces ``mu_k`` whose first moments
match the restrictions of ``nu`` to the cells of any finite partition.  For an
atomic ``nu`` the finest partition separating its atoms is binding, so the
question becomes a transport feasibility problem: a plan ``T[k, j] >= 0`` that
ships all of ``mu``'s atom ``j`` and delivers first moment ``nu_k v_k`` to
atom ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .lp import LinearProgram, solve_lp
from .measures import (
    GridMeasure,
    pairing,
    surface_measure,
    symmetrize_measure,
    volume,
)
from .support_core import SupportVector, _check_same_grid, canonical_translate

MAJORIZATION_TOL = 1e-9
RESHETNYAK_TOL = 1e-8


@dataclass
class TransportWitness:
    plan: np.ndarray  # (len(nu_atoms), len(mu_atoms))
    nu_atoms: np.ndarray
    mu_atoms: np.ndarray

    def residuals(self, mu: GridMeasure, nu: GridMeasure) -> dict:
        u = mu.grid.directions
        T = self.plan
        col = np.abs(T.sum(axis=0) - mu.weights[self.mu_atoms])
        moment = T @ u[self.mu_atoms] - nu.weights[self.nu_atoms, None] * u[self.nu_atoms]
        return {
            "columns": float(np.max(col, initial=0.0)),
            "moments": float(np.max(np.abs(moment), initial=0.0)),
            "negativity": float(max(0.0, -np.min(T, initial=0.0))),
        }


@dataclass
class SublinearFunction:
    """``p(x) = max_k (a_k, x)``, a finite max of linear functionals."""

    vectors: np.ndarray

    def __call__(self, x) -> np.ndarray:
        return np.max(np.atleast_2d(x) @ self.vectors.T, axis=1)

    def integral(self, mu: GridMeasure) -> float:
        return float(self(mu.grid.directions) @ mu.weights)


@dataclass
class MajorizationResult:
    dominated: bool
    witness: Optional[TransportWitness] = None
    defect: float = 0.0
    violator: Optional[SublinearFunction] = None

    def __bool__(self):
        return self.dominated


def _atoms(w: GridMeasure) -> np.ndarray:
    return np.flatnonzero(w.weights > 0)


def _transport_rows(u, mu_atoms, nu_atoms):
    """Sparse equality rows: column sums, then x/y moments per nu atom."""
    K, J = len(nu_atoms), len(mu_atoms)
    nvar = K * J
    var = np.arange(nvar).reshape(K, J)
    # column sums: for each j, sum over k
    col_rows = np.repeat(np.arange(J)[None, :], K, axis=0).ravel()
    C = sp.csr_matrix((np.ones(nvar), (col_rows, var.ravel())), shape=(J, nvar))
    ux = np.tile(u[mu_atoms, 0], K)
    uy = np.tile(u[mu_atoms, 1], K)
    rows = np.repeat(np.arange(K), J)
    Mx = sp.csr_matrix((ux, (rows, var.ravel())), shape=(K, nvar))
    My = sp.csr_matrix((uy, (rows, var.ravel())), shape=(K, nvar))
    return C, Mx, My


def majorizes(mu: GridMeasure, nu: GridMeasure, tol: float = MAJORIZATION_TOL,
              want_violator: bool = False) -> MajorizationResult:
    """Decide ``mu >> nu`` by the transport LP.

    The LP minimizes the L1 defect of the moment equations; ``mu`` dominates
    when the defect is at most ``tol * max(1, mass(mu))``.
    """
    grid = _check_same_grid(mu, nu)
    u = grid.directions
    nu_atoms = _atoms(nu)
    mu_atoms = _atoms(mu)
    if len(nu_atoms) == 0:
        plan = np.zeros((0, len(mu_atoms)))
        return MajorizationResult(True, TransportWitness(plan, nu_atoms, mu_atoms))
    scale = max(1.0, mu.mass, nu.mass)
    if len(mu_atoms) == 0:
        res = MajorizationResult(False, defect=nu.mass)
        if want_violator:
            res.violator = find_violator(mu, nu)
        return res

    K, J = len(nu_atoms), len(mu_atoms)
    C, Mx, My = _transport_rows(u, mu_atoms, nu_atoms)
    nT = K * J
    nm = 2 * K  # moment rows carry +/- slack
    I = sp.identity(nm, format="csr")
    A = sp.vstack([
        sp.hstack([C, sp.csr_matrix((J, 2 * nm))]),
        sp.hstack([sp.vstack([Mx, My]), I, -I]),
    ], format="csr")
    b = np.concatenate([
        mu.weights[mu_atoms],
        nu.weights[nu_atoms] * u[nu_atoms, 0],
        nu.weights[nu_atoms] * u[nu_atoms, 1],
    ])
    c = np.concatenate([np.zeros(nT), -np.ones(2 * nm)])
    sol = solve_lp(LinearProgram(c, A=A, b=b))
    if not sol.ok:
        raise RuntimeError(f"transport LP failed: {sol.status} {sol.message}")
    defect = -sol.objective_value
    plan = np.maximum(sol.x[:nT].reshape(K, J), 0.0)
    ok = defect <= tol * scale
    res = MajorizationResult(bool(ok), TransportWitness(plan, nu_atoms, mu_atoms) if ok else None, defect)
    if not ok and want_violator:
        res.violator = find_violator(mu, nu)
    return res


def find_violator(mu: GridMeasure, nu: GridMeasure) -> Optional[SublinearFunction]:
    """Sublinear ``p`` with ``int p dmu < int p dnu`` from the Farkas dual, or None.

    Dual variables: ``a_j`` per mu-atom, ``y_k`` per nu-atom with
    ``a_j + (y_k, u_j) >= 0``; then ``p(x) = max_k (-y_k, x)`` separates.
    """
    grid = _check_same_grid(mu, nu)
    u = grid.directions
    nu_atoms = _atoms(nu)
    mu_atoms = _atoms(mu)
    K, J = len(nu_atoms), len(mu_atoms)
    if K == 0:
        return None
    # variables: a (J), y (2K); constraint -(a_j + y_k.u_j) <= 0
    nvar = J + 2 * K
    rows = np.arange(K * J)
    kk, jj = np.divmod(rows, J)
    data = np.concatenate([-np.ones(K * J), -u[mu_atoms[jj], 0], -u[mu_atoms[jj], 1]])
    cols = np.concatenate([jj, J + 2 * kk, J + 2 * kk + 1])
    G = sp.csr_matrix((data, (np.tile(rows, 3), cols)), shape=(K * J, nvar))
    obj = np.concatenate([
        mu.weights[mu_atoms],
        (nu.weights[nu_atoms, None] * u[nu_atoms]).ravel(),
    ])
    lower = np.concatenate([np.full(J, -3.0), np.full(2 * K, -1.0)])
    upper = np.concatenate([np.full(J, 3.0), np.full(2 * K, 1.0)])
    sol = solve_lp(LinearProgram(-obj, G=G, d=np.zeros(K * J), lower=lower, upper=upper))
    if not sol.ok or -sol.objective_value > -RESHETNYAK_TOL:
        return None
    y = sol.x[J:].reshape(K, 2)
    p = SublinearFunction(np.unique(np.round(-y, 12), axis=0))
    if p.integral(mu) < p.integral(nu) - RESHETNYAK_TOL:
        return p
    return None


def random_sublinear(rng: np.random.Generator, max_pieces: int = 5) -> SublinearFunction:
    k = int(rng.integers(1, max_pieces + 1))
    return SublinearFunction(rng.normal(size=(k, 2)))


def reshetnyak_check(mu: GridMeasure, nu: GridMeasure, trials: int = 1000, seed: int = 0,
                     tol: float = RESHETNYAK_TOL) -> bool:
    """Sample sublinear ``p`` and test ``int p dmu >= int p dnu - tol``."""
    return reshetnyak_violation(mu, nu, trials, seed, tol) is None


def reshetnyak_violation(mu, nu, trials=1000, seed=0, tol=RESHETNYAK_TOL):
    _check_same_grid(mu, nu)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        p = random_sublinear(rng)
        if p.integral(mu) < p.integral(nu) - tol:
            return p
    return None


def inclusion_up_to_translation(hx: SupportVector, hy: SupportVector, tol: float = 1e-9):
    """Does a translate of ``y`` fit inside ``x``?  Returns ``(fits, t)``.

    Maximizes the margin ``s`` with ``hy_i + (t, u_i) + s <= hx_i``.
    """
    grid = _check_same_grid(hx, hy)
    u = grid.directions
    G = np.column_stack([u, np.ones(grid.n)])
    d = hx.values - hy.values
    sol = solve_lp(LinearProgram(
        np.array([0.0, 0.0, 1.0]), G=G, d=d,
        lower=np.full(3, -np.inf), upper=np.array([np.inf, np.inf, 1e6]),
    ))
    if not sol.ok:
        raise RuntimeError(f"inclusion LP failed: {sol.status}")
    margin = sol.x[2]
    return bool(margin >= -tol * max(1.0, float(np.max(np.abs(d))))), sol.x[:2]


def inclusion_margin(hx: SupportVector, hy: SupportVector) -> float:
    grid = _check_same_grid(hx, hy)
    u = grid.directions
    G = np.column_stack([u, np.ones(grid.n)])
    sol = solve_lp(LinearProgram(np.array([0.0, 0.0, 1.0]), G=G, d=hx.values - hy.values,
                                 lower=np.full(3, -np.inf), upper=np.array([np.inf, np.inf, 1e6])))
    return float(sol.x[2])


def in_dual_cone_diff(hx: SupportVector, hy: SupportVector, symmetric: bool = False) -> bool:
    """``mu(x) - mu(y)`` lies in the dual of the body cone (or its ball variant)."""
    mx, my = surface_measure(hx), surface_measure(hy)
    if symmetric:
        mx, my = symmetrize_measure(mx), symmetrize_measure(my)
    return majorizes(mx, my).dominated


def alexandrov_dual_margin(f) -> float:
    """``min <f, w>`` over closed probability measures on the grid.

    Equivalently ``max t`` with ``f_i - (a, u_i) >= t`` for some ``a``: ``f`` is
    nonnegative on the Alexandrov cone iff the margin is ``>= 0``.
    """
    f = f.values if isinstance(f, SupportVector) else np.asarray(f, dtype=float)
    n = f.size
    ang = 2 * np.pi * np.arange(n) / n
    u = np.column_stack([np.cos(ang), np.sin(ang)])
    G = np.column_stack([u, np.ones(n)])
    sol = solve_lp(LinearProgram(np.array([0.0, 0.0, 1.0]), G=G, d=f,
                                 lower=np.full(3, -np.inf), upper=np.full(3, np.inf)))
    if sol.status == "unbounded":
        return np.inf
    if not sol.ok:
        raise RuntimeError(f"dual-cone LP failed: {sol.status}")
    return float(sol.x[2])


def in_feasible_dual(f, x_bar: GridMeasure, tol: float = 1e-8) -> bool:
    """``f`` is nonnegative on Alexandrov measures and annihilates ``x_bar``."""
    vals = f.values if isinstance(f, SupportVector) else np.asarray(f, dtype=float)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if alexandrov_dual_margin(vals) < -tol * scale:
        return False
    return abs(pairing(vals, x_bar)) <= tol * scale * max(1.0, x_bar.mass)


def feasible_direction_dual_member(hy: SupportVector, hx_bar: SupportVector, tol: float = 1e-8) -> bool:
    """``mu(y) - mu(x_bar)`` in the dual of the feasible-direction cone at ``x_bar``.

    Membership in the dual of the body cone (majorization) plus orthogonality
    to ``x_bar`` itself: ``<h_xbar, mu(y)> = V(x_bar)``.
    """
    my, mx = surface_measure(hy), surface_measure(hx_bar)
    if not majorizes(my, mx).dominated:
        return False
    gap = pairing(hx_bar, my) - volume(hx_bar)
    return abs(gap) <= tol * max(1.0, volume(hx_bar))


def same_up_to_translation(h1: SupportVector, h2: SupportVector, tol: float = 1e-7) -> bool:
    a, b = canonical_translate(h1).values, canonical_translate(h2).values
    return bool(np.max(np.abs(a - b)) <= tol * max(1.0, float(np.max(np.abs(a)))))
