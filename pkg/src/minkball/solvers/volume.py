"""Volume maximization over a polyhedral region of support vectors.

The engine is Frank-Wolfe on ``phi = sqrt(V)``, which is concave on valid
support vectors (Brunn-Minkowski).  The linear subproblems are LPs over the
region and the line search is exact because ``V`` is quadratic along segments.

When ``V`` restricted to the affine hull of the equality constraints is itself
concave (always the case once the integral breadth is pinned), the problem is a
convex QP and Frank-Wolfe's slow tail is replaced by a primal active-set
finish started from the current iterate.  Optimality is then confirmed by the
Frank-Wolfe gap of the finished point, which is a global certificate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from ..lp import solve_lp
from ..support_core import SupportVector
from .region import FeasibleRegion, InfeasibleRegion, UnboundedRegion

logger = logging.getLogger(__name__)


@dataclass
class VolumeResult:
    h: SupportVector
    volume: float
    gap: float
    iterations: int
    status: str  # optimal | max_iter
    finished_by: str = "frank-wolfe"
    history: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class _Problem:
    def __init__(self, region: FeasibleRegion):
        self.region = region
        self.Q = region.hessian
        self.A, self.b, self.G, self.g, self.labels = region.constraints
        self.base_lp = region.linear_program(np.zeros(region.n_reduced))

    def volume(self, x) -> float:
        return 0.5 * float(x @ self.Q @ x)

    def grad(self, x) -> np.ndarray:
        return self.Q @ x

    def lmo(self, direction) -> np.ndarray:
        lp = self.base_lp
        lp.objective = np.asarray(direction, dtype=float)
        sol = solve_lp(lp)
        if sol.status == "unbounded":
            raise UnboundedRegion("volume is unbounded over the region")
        if sol.status == "infeasible":
            raise InfeasibleRegion("feasible region is empty")
        if not sol.ok:
            raise RuntimeError(f"linear subproblem failed: {sol.status} ({sol.message})")
        return sol.x

    def fw_gap(self, x) -> tuple[float, np.ndarray]:
        """Frank-Wolfe gap of ``phi = sqrt(V)`` at ``x``, and the LP vertex."""
        v = self.volume(x)
        g = self.grad(x)
        s = self.lmo(g)
        phi_grad = g / (2.0 * np.sqrt(max(v, 1e-300)))
        return float(phi_grad @ (s - x)), s

    def concave_on_affine_hull(self) -> bool:
        if len(self.A):
            Z = null_space(self.A)
        else:
            Z = np.eye(self.Q.shape[0])
        if Z.shape[1] == 0:
            return True
        R = Z.T @ self.Q @ Z
        top = float(np.max(np.linalg.eigvalsh(0.5 * (R + R.T))))
        return top <= 1e-9 * max(1.0, float(np.max(np.abs(self.Q))))


def _line_search(prob: _Problem, x, d) -> float:
    # V(x + t d) = V + t g.d + t^2 d.Q.d / 2 on [0, 1]
    slope = float(prob.grad(x) @ d)
    curv = float(d @ prob.Q @ d)
    if slope <= 0:
        return 0.0
    if curv >= 0:
        return 1.0
    return float(min(1.0, -slope / curv))


def _independent_rows(M: np.ndarray, candidates, base: np.ndarray | None, tol=1e-10) -> list:
    """Greedy subset of ``candidates`` rows of ``M`` independent of ``base`` and each other."""
    chosen = []
    basis = np.zeros((0, M.shape[1])) if base is None or len(base) == 0 else base.copy()
    rank = np.linalg.matrix_rank(basis, tol) if len(basis) else 0
    for i in candidates:
        trial = np.vstack([basis, M[i]])
        r = np.linalg.matrix_rank(trial, tol)
        if r > rank:
            basis, rank = trial, r
            chosen.append(int(i))
    return chosen


def _flat_component(flat_H: np.ndarray, C: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Projection of ``p`` onto directions in ``null(H)`` that also satisfy ``C d = 0``."""
    if len(C) == 0:
        basis = flat_H
    else:
        M = C @ flat_H
        _, sv, vt = np.linalg.svd(M)
        rank = int(np.sum(sv > 1e-10 * max(1.0, float(sv[0]) if len(sv) else 1.0)))
        basis = flat_H @ vt[rank:].T
    return basis @ (basis.T @ p)


def active_set_finish(prob: _Problem, x0: np.ndarray, max_iter: int = 5000, tol: float = 1e-10):
    """Primal active-set method for ``max x^T Q x / 2`` from a feasible ``x0``.

    Returns ``(x, converged)``.  Requires concavity on the equality hull.
    """
    H = -prob.Q
    A, G, g = prob.A, prob.G, prob.g
    x = x0.copy()
    scale = max(1.0, float(np.max(np.abs(x))))
    slack = g - G @ x
    if np.any(slack < -1e-7 * scale):
        return x, False
    # project tiny violations away by treating them as active
    tight = np.flatnonzero(slack <= 1e-9 * scale)
    W = _independent_rows(G, tight[np.argsort(slack[tight])], A if len(A) else None)
    m_eq = len(A)
    nv = len(x)
    # null space of H (the translations when no symmetry is imposed); steps are
    # kept free of components that are flat for both objective and working set
    evals, evecs = np.linalg.eigh(H)
    flat_H = evecs[:, np.abs(evals) <= 1e-9 * max(1.0, float(np.max(np.abs(evals))))]
    degenerate = False
    stationary = False  # after an unblocked step x is the working-set stationary point
    for _ in range(max_iter):
        C = np.vstack([A, G[W]]) if (m_eq or W) else np.zeros((0, nv))
        k = len(C)
        K = np.block([[H, C.T], [C, np.zeros((k, k))]])
        rhs = np.concatenate([-H @ x, np.zeros(k)])
        try:
            sol = np.linalg.solve(K, rhs)
            # translations leave the area unchanged, so K is singular whenever the
            # working set does not pin them; reject the garbage solve() returns then
            r_norm = 1.0 + np.linalg.norm(rhs)
            if (not np.all(np.isfinite(sol)) or np.linalg.norm(K @ sol - rhs) > 1e-11 * r_norm
                    or np.linalg.norm(sol) > 1e8 * r_norm):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        p, lam = sol[:nv], sol[nv:]
        if flat_H.shape[1]:
            p = p - _flat_component(flat_H, C, p)
        if stationary or np.linalg.norm(p) <= 1e-11 * scale:
            stationary = False
            lam_w = lam[m_eq:]
            thresh = -tol * max(1.0, np.max(np.abs(lam_w))) if len(lam_w) else 0.0
            if len(lam_w) == 0 or np.min(lam_w) >= thresh:
                return x, True
            if degenerate:
                # least-index rule while stalled at a degenerate point: no cycling
                neg = [k for k in range(len(W)) if lam_w[k] < thresh]
                W.pop(min(neg, key=lambda k: W[k]))
            else:
                W.pop(int(np.argmin(lam_w)))
            continue
        Gp = G @ p
        step, block = 1.0, None
        inW = np.zeros(len(G), dtype=bool)
        inW[W] = True
        cand = np.flatnonzero((~inW) & (Gp > 1e-14 * np.linalg.norm(p)))
        if len(cand):
            ratios = np.maximum(g[cand] - G[cand] @ x, 0.0) / Gp[cand]
            j = int(np.argmin(ratios))
            if ratios[j] < step:
                step, block = float(ratios[j]), int(cand[j])
                if step <= 0.0:
                    block = int(np.min(cand[ratios <= 0.0]))
        degenerate = step <= 0.0
        x = x + step * p
        if block is not None:
            W.append(block)
        else:
            stationary = True
    return x, False


def maximize_volume(region: FeasibleRegion, max_iter: int = 20000, gap_tol: float = 1e-9,
                    finish: bool = True, finish_every: int = 25, x_start=None) -> VolumeResult:
    """Maximize area over ``region``; see module docstring for the algorithm."""
    prob = _Problem(region)
    m = region.n_reduced
    if x_start is None:
        # start from the LP vertex maximizing total support: a large body
        x = prob.lmo(np.ones(m))
    else:
        x = np.asarray(x_start, dtype=float)
    concave = finish and prob.concave_on_affine_hull()
    history = []
    best_gap = np.inf
    for it in range(1, max_iter + 1):
        gap, s = prob.fw_gap(x)
        phi = np.sqrt(max(prob.volume(x), 0.0))
        history.append((prob.volume(x), gap))
        best_gap = gap
        if gap <= gap_tol * max(1.0, phi):
            return VolumeResult(region.lift(x), prob.volume(x), gap, it, "optimal", "frank-wolfe", history)
        if concave and it % finish_every == 0:
            xf, ok = active_set_finish(prob, x)
            if ok:
                gap_f, _ = prob.fw_gap(xf)
                phi_f = np.sqrt(max(prob.volume(xf), 0.0))
                if gap_f <= gap_tol * max(1.0, phi_f):
                    return VolumeResult(region.lift(xf), prob.volume(xf), gap_f, it, "optimal",
                                        "active-set", history)
                logger.debug("active-set finish left gap %.3e; continuing", gap_f)
                if prob.volume(xf) > prob.volume(x):
                    x = xf
                    continue
        t = _line_search(prob, x, s - x)
        if t == 0.0:
            # no ascent along the FW direction: x is optimal up to LP accuracy
            return VolumeResult(region.lift(x), prob.volume(x), gap, it, "optimal", "frank-wolfe", history)
        x = x + t * (s - x)
    logger.warning("Frank-Wolfe stopped at the iteration cap with gap %.3e", best_gap)
    return VolumeResult(region.lift(x), prob.volume(x), best_gap, max_iter, "max_iter", "frank-wolfe", history)
