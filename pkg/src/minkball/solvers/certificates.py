"""LP-checkable optimality certificates.

Each checker takes a candidate body and searches for the multipliers of the
corresponding optimality criterion; the LP minimizes the violation, so a
non-optimal body produces a large residual instead of a silent failure.

Flattening atoms carry weight ``FLATTEN_ATOM_WEIGHT * beta`` each.  With the
pairing ``<f, mu> = (1/N) sum f_i w_i`` this is the normalization under which
the pair ``beta (eps_z + eps_-z)`` pairs with a body to ``2 N beta b_z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..lp import LinearProgram, solve_lp
from ..majorization import majorizes
from ..measures import DIMENSION, GridMeasure, disk_measure, integral_breadth, pairing, surface_measure, volume
from ..support_core import SupportVector, _check_same_grid, breadth, edge_lengths

CERT_TOL = 1e-7
CONTACT_TOL = 1e-6
FLATTEN_ATOM_WEIGHT = 2.0 * DIMENSION ** 2


@dataclass
class Certificate:
    alpha: float
    beta: float
    witness_measure: GridMeasure
    residual: float
    contact_violation: float
    feasibility: float = 0.0
    tol: float = CERT_TOL
    kind: str = ""
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.residual <= self.tol and self.contact_violation <= self.tol
                and self.feasibility <= self.tol)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{self.kind} certificate {verdict}: alpha={self.alpha:.10g} beta={self.beta:.10g} "
                f"residual={self.residual:.3e} contact={self.contact_violation:.3e} "
                f"feasibility={self.feasibility:.3e}")

    def to_dict(self) -> dict:
        return {
            "alpha": float(self.alpha),
            "beta": float(self.beta),
            "residual": float(self.residual),
            "contact_violation": float(self.contact_violation),
            "feasibility": float(self.feasibility),
            "pass": bool(self.passed),
            "kind": self.kind,
            "witness": [float(v) for v in self.witness_measure.weights],
        }


def contact_indices(h: SupportVector, x0: SupportVector, tol: float = CONTACT_TOL) -> np.ndarray:
    return np.flatnonzero(np.abs(h.values - x0.values) <= tol * (1.0 + np.abs(x0.values)))


def flatten_vector(n: int, z: int) -> np.ndarray:
    e = np.zeros(n)
    e[z % n] += FLATTEN_ATOM_WEIGHT
    e[(z + n // 2) % n] += FLATTEN_ATOM_WEIGHT
    return e


def _sym_matrix(n: int, cols: np.ndarray) -> np.ndarray:
    """``S`` with ``Sym(m) = S @ m_C`` for a measure supported on ``cols``."""
    S = np.zeros((n, len(cols)))
    for k, i in enumerate(cols):
        S[i, k] += 0.5
        S[(i + n // 2) % n, k] += 0.5
    return S


def _body_feasibility(h: SupportVector, x0: SupportVector, inside: bool, symmetric: bool) -> float:
    scale = max(1.0, float(np.max(np.abs(h.values))))
    ell = edge_lengths(h)
    r = max(0.0, -float(np.min(ell)))
    diff = h.values - x0.values
    r = max(r, float(np.max(diff if inside else -diff)))
    if symmetric:
        half = h.grid.half
        r = max(r, float(np.max(np.abs(h.values[:half] - h.values[half:]))))
    return r / scale


def check_internal_certificate(h_bar: SupportVector, x0: SupportVector, z_idx: int | None,
                               tol: float = CERT_TOL, contact_tol: float = CONTACT_TOL) -> Certificate:
    """Search ``mu(x_bar) = Sym(m) + alpha mu(ball) + beta (eps_z + eps_-z)``.

    ``m`` is a closed nonnegative measure supported where ``x_bar`` touches
    the even hull bound ``min(h0(u), h0(-u))``: an even body lies in ``x0``
    exactly when it lies in ``x0`` and ``-x0``, so contacts come in antipodal
    pairs.  The LP minimizes the L-infinity defect, then the total multiplier
    mass among minimizers.
    """
    grid = _check_same_grid(h_bar, x0)
    n = grid.n
    u = grid.directions
    w_bar = surface_measure(h_bar, tol=1e-7).weights
    d = disk_measure(grid).weights
    bound = SupportVector(grid, np.minimum(x0.values, np.roll(x0.values, -grid.half)))
    C = contact_indices(h_bar, bound, contact_tol)
    S = _sym_matrix(n, C)
    fz = flatten_vector(n, z_idx) if z_idx is not None else np.zeros(n)
    nc = len(C)
    # variables: m_C, alpha, beta, t
    nv = nc + 3
    B = np.hstack([S, d[:, None], fz[:, None]])
    G = np.vstack([
        np.hstack([B, -np.ones((n, 1))]),
        np.hstack([-B, -np.ones((n, 1))]),
    ])
    dvec = np.concatenate([w_bar, -w_bar])
    A = np.zeros((2, nv))
    A[:, :nc] = u[C].T
    lower = np.zeros(nv)
    upper = np.full(nv, np.inf)
    if z_idx is None:
        upper[nc + 1] = 0.0
    obj = np.zeros(nv)
    obj[-1] = -1.0
    sol = solve_lp(LinearProgram(obj, A=A, b=np.zeros(2), G=G, d=dvec, lower=lower, upper=upper))
    if not sol.ok:
        raise RuntimeError(f"certificate LP failed: {sol.status}")
    t_star = sol.x[-1]
    # canonical tie-break among minimizers
    upper2 = upper.copy()
    upper2[-1] = t_star * (1 + 1e-9) + 1e-15
    obj2 = np.concatenate([-np.ones(nc + 2), [0.0]])
    sol2 = solve_lp(LinearProgram(obj2, A=A, b=np.zeros(2), G=G, d=dvec, lower=lower, upper=upper2))
    x = sol2.x if sol2.ok else sol.x
    m_c, alpha, beta = x[:nc], x[nc], x[nc + 1]
    resid_vec = w_bar - B @ x[:nc + 2]
    scale = max(1.0, float(np.max(w_bar)))
    residual = float(np.max(np.abs(resid_vec))) / scale
    closure = float(np.linalg.norm(u[C].T @ m_c)) / scale if nc else 0.0
    m_full = np.zeros(n)
    m_full[C] = m_c
    used = C[m_c > 1e-12 * scale]
    contact = float(np.max(np.abs(h_bar.values[used] - bound.values[used]), initial=0.0))
    feas = _body_feasibility(h_bar, x0, inside=True, symmetric=True)
    return Certificate(alpha, beta, GridMeasure(grid, np.maximum(S @ m_c, 0.0)),
                       max(residual, closure), contact, feas, tol, "internal",
                       {"contact_set": C, "contact_measure": m_full})


def _plan_pairs(K_idx, J_idx, identity: bool):
    """Allowed (row, column) positions of a transport plan.

    The identity plan ships every column atom to the row at the same
    direction; it is a valid (sufficient) witness and tiny compared with the
    full ``K x J`` plan.
    """
    if identity:
        pos = {int(k): r for r, k in enumerate(K_idx)}
        kk = np.array([pos[int(j)] for j in J_idx if int(j) in pos], dtype=int)
        jj = np.array([c for c, j in enumerate(J_idx) if int(j) in pos], dtype=int)
        return kk, jj
    kk, jj = np.divmod(np.arange(len(K_idx) * len(J_idx)), len(J_idx))
    return kk, jj


def _transport_block(K_idx, J_idx, u, pairs):
    """Sparse maps for a plan over ``pairs``: column sums (J rows), moments (2K rows)."""
    kk, jj = pairs
    K, J = len(K_idx), len(J_idx)
    nT = len(kk)
    var = np.arange(nT)
    colsum = sp.csr_matrix((np.ones(nT), (jj, var)), shape=(J, nT))
    mx = sp.csr_matrix((u[J_idx[jj], 0], (kk, var)), shape=(K, nT))
    my = sp.csr_matrix((u[J_idx[jj], 1], (kk, var)), shape=(K, nT))
    return colsum, sp.vstack([mx, my], format="csr")


def check_external_certificate(h_bar: SupportVector, x0: SupportVector,
                               tol: float = CERT_TOL, contact_tol: float = CONTACT_TOL,
                               equation_tol: float = 1e-6, plan: str = "auto") -> Certificate:
    """Criterion for the external problem around ``x0`` with fixed integral breadth.

    Finds ``alpha >= 0`` and ``mu* >= 0`` on the contact set with
    (1) ``alpha mu(ball) >> mu(x_bar) + mu*``,
    (2) ``V(x_bar) + <x_bar, mu*> = alpha V1(ball, x_bar)``,
    jointly in one transport LP; (1) is then re-checked by ``majorizes``.
    ``plan="auto"`` first tries the identity plan and falls back to the full one.
    """
    if plan == "auto":
        cert = check_external_certificate(h_bar, x0, tol, contact_tol, equation_tol, "identity")
        if cert.passed:
            return cert
        plan = "full"
    identity = plan == "identity"
    grid = _check_same_grid(h_bar, x0)
    n = grid.n
    u = grid.directions
    w_bar = surface_measure(h_bar, tol=1e-7).weights
    d = disk_measure(grid).weights
    C = contact_indices(h_bar, x0, contact_tol)
    V = volume(h_bar)
    ib = integral_breadth(h_bar)
    scale = max(1.0, float(np.max(w_bar)))

    K_idx = np.arange(n) if identity else np.union1d(np.flatnonzero(w_bar > 0), C)
    J_idx = np.arange(n)
    K, J, nc = len(K_idx), n, len(C)
    colsum, moments = _transport_block(K_idx, J_idx, u, _plan_pairs(K_idx, J_idx, identity))
    nT = colsum.shape[1]
    pos_in_K = {int(k): r for r, k in enumerate(K_idx)}
    # variable layout: T | alpha | mu_C | s+ (2K) | s- (2K) | e+ | e-
    o_a, o_m = nT, nT + 1
    o_sp = o_m + nc
    o_sn = o_sp + 2 * K
    o_e = o_sn + 2 * K
    nv = o_e + 2
    rows = []
    # column sums: sum_k T_kj - alpha d_j = 0
    blk = sp.hstack([colsum, sp.csr_matrix(-d[:, None]), sp.csr_matrix((J, nv - nT - 1))], format="csr")
    rows.append(blk)
    rhs = [np.zeros(J)]
    # moments: sum_j T_kj u_j - mu*_k u_k - s+ + s- = w_k u_k
    Mmu = np.zeros((2 * K, nc))
    for c_pos, i in enumerate(C):
        r = pos_in_K[int(i)]
        Mmu[r, c_pos] = -u[i, 0]
        Mmu[K + r, c_pos] = -u[i, 1]
    I2 = sp.identity(2 * K, format="csr")
    blk = sp.hstack([moments, sp.csr_matrix((2 * K, 1)), sp.csr_matrix(Mmu), -I2, I2,
                     sp.csr_matrix((2 * K, 2))], format="csr")
    rows.append(blk)
    rhs.append(np.concatenate([w_bar[K_idx] * u[K_idx, 0], w_bar[K_idx] * u[K_idx, 1]]))
    # energy balance: <h, mu*> - alpha ib + e+ - e- = -V
    eq = np.zeros(nv)
    eq[o_a] = -ib
    eq[o_m:o_m + nc] = h_bar.values[C] / DIMENSION
    eq[o_e], eq[o_e + 1] = 1.0, -1.0
    rows.append(sp.csr_matrix(eq[None, :]))
    rhs.append(np.array([-V]))
    A = sp.vstack(rows, format="csr")
    b = np.concatenate(rhs)
    obj = np.zeros(nv)
    obj[o_sp:o_e] = -1.0 / scale
    obj[o_e:o_e + 2] = -1.0 / max(V, 1e-300)
    sol = solve_lp(LinearProgram(obj, A=A, b=b))
    if not sol.ok:
        raise RuntimeError(f"external certificate LP failed: {sol.status} {sol.message}")
    x = sol.x
    alpha = float(x[o_a])
    mu_c = np.maximum(x[o_m:o_m + nc], 0.0)
    mu_star = np.zeros(n)
    mu_star[C] = mu_c
    mu_star_m = GridMeasure(grid, mu_star)
    eq_resid = abs(V + pairing(h_bar, mu_star_m) - alpha * ib) / max(V, 1e-300)
    # independent re-check of (1) through the majorization module
    lhs = GridMeasure(grid, alpha * d)
    rhs_m = GridMeasure(grid, w_bar + mu_star)
    if identity:
        gap = np.abs(lhs.weights - rhs_m.weights)
        maj_defect, maj_ok = float(np.sum(gap)), float(np.max(gap)) <= tol * scale
        major_resid = float(np.max(gap)) / scale
    else:
        maj = majorizes(lhs, rhs_m, tol=tol)
        maj_defect, maj_ok = maj.defect, maj.dominated
        major_resid = maj.defect / max(1.0, lhs.mass)
    used = C[mu_c > 1e-12 * scale]
    contact = float(np.max(np.abs(h_bar.values[used] - x0.values[used]), initial=0.0))
    feas = _body_feasibility(h_bar, x0, inside=False, symmetric=False)
    residual = max(major_resid, eq_resid if eq_resid > equation_tol else 0.0)
    cert = Certificate(alpha, 0.0, mu_star_m, residual, contact, feas, tol, "external",
                       {"contact_set": C, "equation_residual": eq_resid,
                        "majorization_defect": maj_defect, "majorized": maj_ok, "plan": plan})
    if eq_resid > equation_tol:
        cert.residual = max(cert.residual, eq_resid)
    return cert


def check_external_flatten_certificate(h_bar: SupportVector, x0: SupportVector, z_idx: int,
                                       tol: float = CERT_TOL, contact_tol: float = CONTACT_TOL,
                                       equation_tol: float = 1e-6, plan: str = "auto") -> Certificate:
    """Criterion for the external problem with flattening over Minkowski balls.

    Finds ``alpha, beta >= 0`` and a closed ``m >= 0`` on the contact set with
    (i)   ``mu(x_bar) + Sym(m) >> alpha mu(ball) + beta (eps_z + eps_-z)``,
    (ii)  ``V(x_bar) + V1(Sym(m), x_bar) = alpha V1(ball, x_bar) + 2 N beta b_z(x_bar)``,
    (iii) ``m`` lives where ``x_bar`` touches the even bound ``max(h0(u), h0(-u))``.
    """
    if plan == "auto":
        cert = check_external_flatten_certificate(h_bar, x0, z_idx, tol, contact_tol, equation_tol, "identity")
        if cert.passed:
            return cert
        plan = "full"
    identity = plan == "identity"
    grid = _check_same_grid(h_bar, x0)
    n = grid.n
    u = grid.directions
    w_bar = surface_measure(h_bar, tol=1e-7).weights
    d = disk_measure(grid).weights
    fz = flatten_vector(n, z_idx)
    bound = SupportVector(grid, np.maximum(x0.values, np.roll(x0.values, -grid.half)))
    C = contact_indices(h_bar, bound, contact_tol)
    nc = len(C)
    S = _sym_matrix(n, C)
    V = volume(h_bar)
    ib = integral_breadth(h_bar)
    bz = breadth(h_bar, z_idx)
    scale = max(1.0, float(np.max(w_bar)))

    J_idx = np.union1d(np.flatnonzero(w_bar > 0), np.union1d(C, (C + n // 2) % n)).astype(int)
    K_idx = np.arange(n)
    K, J = n, len(J_idx)
    colsum, moments = _transport_block(K_idx, J_idx, u, _plan_pairs(K_idx, J_idx, identity))
    nT = colsum.shape[1]
    # layout: T | m_C | alpha | beta | s+ (2K) | s- (2K) | e+ | e-
    o_m = nT
    o_a = o_m + nc
    o_b = o_a + 1
    o_sp = o_b + 1
    o_sn = o_sp + 2 * K
    o_e = o_sn + 2 * K
    nv = o_e + 2
    rows, rhs = [], []
    # columns: sum_k T_kj - Sym(m)_j = w_j
    blk = sp.hstack([colsum, sp.csr_matrix(-S[J_idx]), sp.csr_matrix((J, nv - nT - nc))], format="csr")
    rows.append(blk)
    rhs.append(w_bar[J_idx])
    # rows: sum_j T_kj u_j - (alpha d_k + beta fz_k) u_k - s+ + s- = 0
    ab = np.zeros((2 * K, 2))
    ab[:K, 0] = -d * u[:, 0]
    ab[K:, 0] = -d * u[:, 1]
    ab[:K, 1] = -fz * u[:, 0]
    ab[K:, 1] = -fz * u[:, 1]
    I2 = sp.identity(2 * K, format="csr")
    blk = sp.hstack([moments, sp.csr_matrix((2 * K, nc)), sp.csr_matrix(ab), -I2, I2,
                     sp.csr_matrix((2 * K, 2))], format="csr")
    rows.append(blk)
    rhs.append(np.zeros(2 * K))
    # closure of m
    clo = sp.hstack([sp.csr_matrix((2, nT)), sp.csr_matrix(u[C].T), sp.csr_matrix((2, nv - nT - nc))],
                    format="csr")
    rows.append(clo)
    rhs.append(np.zeros(2))
    # (ii): <h, Sym m> - alpha ib - (fz weight) beta pairing + e+ - e- = -V
    eq = np.zeros(nv)
    eq[o_m:o_m + nc] = (h_bar.values @ S) / DIMENSION
    eq[o_a] = -ib
    eq[o_b] = -pairing(h_bar.values, fz)
    eq[o_e], eq[o_e + 1] = 1.0, -1.0
    rows.append(sp.csr_matrix(eq[None, :]))
    rhs.append(np.array([-V]))
    A = sp.vstack(rows, format="csr")
    b = np.concatenate(rhs)
    obj = np.zeros(nv)
    obj[o_sp:o_e] = -1.0 / scale
    obj[o_e:o_e + 2] = -1.0 / max(V, 1e-300)
    sol = solve_lp(LinearProgram(obj, A=A, b=b))
    if not sol.ok:
        raise RuntimeError(f"external flattening certificate LP failed: {sol.status} {sol.message}")
    x = sol.x
    m_c = np.maximum(x[o_m:o_m + nc], 0.0)
    alpha, beta = float(x[o_a]), float(x[o_b])
    nu = S @ m_c
    nu_m = GridMeasure(grid, np.maximum(nu, 0.0))
    # the printed energy identity, evaluated directly
    lhs = V + pairing(h_bar, nu_m)
    rhs_val = alpha * ib + 2 * DIMENSION * beta * bz
    eq_resid = abs(lhs - rhs_val) / max(V, 1e-300)
    big, small = w_bar + nu, alpha * d + beta * fz
    if identity:
        gap = np.abs(big - small)
        maj_defect, maj_ok = float(np.sum(gap)), float(np.max(gap)) <= tol * scale
        major_resid = float(np.max(gap)) / scale
    else:
        maj = majorizes(GridMeasure(grid, big), GridMeasure(grid, np.maximum(small, 0.0)), tol=tol)
        maj_defect, maj_ok = maj.defect, maj.dominated
        major_resid = maj.defect / max(1.0, float(np.sum(big)))
    closure = float(np.linalg.norm(u[C].T @ m_c)) / scale if nc else 0.0
    used = C[m_c > 1e-12 * scale]
    contact = float(np.max(np.abs(h_bar.values[used] - bound.values[used]), initial=0.0))
    feas = _body_feasibility(h_bar, x0, inside=False, symmetric=True)
    residual = max(major_resid, closure, eq_resid if eq_resid > equation_tol else 0.0)
    return Certificate(alpha, beta, nu_m, residual, contact, feas, tol, "external-flatten",
                       {"contact_set": C, "equation_residual": eq_resid, "majorized": maj_ok,
                        "majorization_defect": maj_defect, "plan": plan})
