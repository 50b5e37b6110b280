"""Dense/sparse linear-programming oracle used across the package.

Problems are stated as maximizations::

    maximize    c . x
    subject to  A x  = b
                G x <= d
                lower <= x <= upper

The heavy lifting is delegated to the HiGHS dual simplex shipped with scipy;
this module owns the problem record, status mapping, dual extraction and the
post-solve residual checks that certificates rely on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LpConfig:
    pivot_tol: float = 1e-10
    feasibility_tol: float = 1e-8
    slackness_tol: float = 1e-7
    method: str = "highs-ds"


DEFAULT_CONFIG = LpConfig()


class LpError(ValueError):
    pass


@dataclass
class LinearProgram:
    objective: np.ndarray
    A: Optional[object] = None
    b: Optional[np.ndarray] = None
    G: Optional[object] = None
    d: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        nv = self.objective.size
        for mat, rhs, name in ((self.A, self.b, "A"), (self.G, self.d, "G")):
            if (mat is None) != (rhs is None):
                raise LpError(f"{name} and its right-hand side must be given together")
            if mat is not None:
                if mat.shape[1] != nv:
                    raise LpError(f"{name} has {mat.shape[1]} columns, expected {nv}")
                if np.asarray(rhs).ravel().size != mat.shape[0]:
                    raise LpError(f"{name} right-hand side has wrong length")
        self.lower = np.zeros(nv) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(nv, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.lower.size != nv or self.upper.size != nv:
            raise LpError("bounds have wrong length")
        if not np.all(np.isfinite(self.objective)):
            raise LpError("objective must be finite")

    @property
    def n_vars(self) -> int:
        return self.objective.size


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded | failed
    x: Optional[np.ndarray] = None
    objective_value: float = float("nan")
    eq_duals: Optional[np.ndarray] = None
    ineq_duals: Optional[np.ndarray] = None
    lower_duals: Optional[np.ndarray] = None
    upper_duals: Optional[np.ndarray] = None
    primal_residual: float = float("nan")
    message: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _rows(mat) -> int:
    return 0 if mat is None else mat.shape[0]


def primal_residual(p: LinearProgram, x: np.ndarray) -> float:
    r = 0.0
    if p.A is not None:
        r = max(r, float(np.max(np.abs(p.A @ x - p.b), initial=0.0)))
    if p.G is not None:
        r = max(r, float(np.max(p.G @ x - p.d, initial=0.0)))
    r = max(r, float(np.max(p.lower - x, initial=0.0)), float(np.max(x - p.upper, initial=0.0)))
    return r


def solve_lp(p: LinearProgram, config: LpConfig = DEFAULT_CONFIG) -> LpSolution:
    bounds = np.column_stack([p.lower, p.upper])
    options = {
        "primal_feasibility_tolerance": min(1e-9, config.feasibility_tol),
        "dual_feasibility_tolerance": min(1e-9, config.feasibility_tol),
    }
    try:
        res = linprog(
            -p.objective,
            A_ub=p.G,
            b_ub=None if p.d is None else np.asarray(p.d, dtype=float).ravel(),
            A_eq=p.A,
            b_eq=None if p.b is None else np.asarray(p.b, dtype=float).ravel(),
            bounds=bounds,
            method=config.method,
            options=options,
        )
    except ValueError as exc:  # scipy input validation
        raise LpError(str(exc)) from exc

    if res.status == 2:
        return LpSolution("infeasible", message=res.message)
    if res.status == 3:
        return LpSolution("unbounded", message=res.message)
    if res.status != 0 or res.x is None:
        return LpSolution("failed", message=res.message)

    x = np.asarray(res.x, dtype=float)
    sol = LpSolution(
        "optimal",
        x=x,
        objective_value=float(p.objective @ x),
        eq_duals=None if p.A is None else -np.asarray(res.eqlin.marginals),
        ineq_duals=None if p.G is None else np.asarray(res.ineqlin.marginals),
        lower_duals=-np.asarray(res.lower.marginals),
        upper_duals=-np.asarray(res.upper.marginals),
        message=res.message,
    )
    # sign convention for the maximization: ineq_duals <= 0 from HiGHS (minimize
    # form); report y >= 0 with c = A^T y_eq + G^T y_ineq + bound terms
    if sol.ineq_duals is not None:
        sol.ineq_duals = -sol.ineq_duals
    sol.primal_residual = primal_residual(p, x)
    b_scale = 1.0 + max(
        float(np.max(np.abs(p.b), initial=0.0)) if p.b is not None else 0.0,
        float(np.max(np.abs(p.d), initial=0.0)) if p.d is not None else 0.0,
    )
    if sol.primal_residual > config.feasibility_tol * b_scale:
        logger.warning("LP solution residual %.3e exceeds tolerance", sol.primal_residual)
        sol.status = "failed"
        sol.message = f"primal residual {sol.primal_residual:.3e} above tolerance"
    return sol


def dual_objective(p: LinearProgram, sol: LpSolution) -> float:
    """Value of the dual certificate attached to an optimal solution."""
    val = 0.0
    if p.A is not None:
        val += float(np.asarray(p.b).ravel() @ sol.eq_duals)
    if p.G is not None:
        val += float(np.asarray(p.d).ravel() @ sol.ineq_duals)
    lo = np.where(np.isfinite(p.lower), p.lower, 0.0)
    hi = np.where(np.isfinite(p.upper), p.upper, 0.0)
    val += float(lo @ sol.lower_duals) + float(hi @ sol.upper_duals)
    return val


def complementary_slackness_residual(p: LinearProgram, sol: LpSolution) -> float:
    x = sol.x
    r = 0.0
    if p.G is not None:
        slack = np.asarray(p.d).ravel() - p.G @ x
        r = max(r, float(np.max(np.abs(slack * sol.ineq_duals), initial=0.0)))
    lo_gap = np.where(np.isfinite(p.lower), x - p.lower, 0.0)
    hi_gap = np.where(np.isfinite(p.upper), p.upper - x, 0.0)
    r = max(r, float(np.max(np.abs(lo_gap * sol.lower_duals), initial=0.0)))
    r = max(r, float(np.max(np.abs(hi_gap * sol.upper_duals), initial=0.0)))
    return r


def feasible(A=None, b=None, G=None, d=None, lower=None, upper=None, n_vars=None,
             config: LpConfig = DEFAULT_CONFIG):
    """Phase-one feasibility probe.  Returns ``(is_feasible, witness_or_None)``."""
    if n_vars is None:
        for mat in (A, G):
            if mat is not None:
                n_vars = mat.shape[1]
                break
        else:
            if lower is not None:
                n_vars = np.asarray(lower).size
            elif upper is not None:
                n_vars = np.asarray(upper).size
            else:
                raise LpError("cannot infer the number of variables")
    prog = LinearProgram(np.zeros(n_vars), A=A, b=b, G=G, d=d, lower=lower, upper=upper)
    sol = solve_lp(prog, config)
    if sol.status == "optimal":
        return True, sol.x
    if sol.status == "infeasible":
        return False, None
    raise LpError(f"feasibility probe failed: {sol.status} ({sol.message})")


def stack_rows(blocks):
    """Vertically stack dense or sparse row blocks into one CSR matrix."""
    blocks = [b for b in blocks if b is not None and b.shape[0] > 0]
    if not blocks:
        return None
    return sp.vstack([sp.csr_matrix(b) for b in blocks], format="csr")
