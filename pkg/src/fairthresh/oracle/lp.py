"""Linear-program form of the constrained fair classification problem.

Over a finite support, the cost-sensitive risk and every group's disparity
linear form are affine in the acceptance probabilities f(x_i) in [0, 1], so
the constrained risk minimization is a small LP:

    minimize    sum_i u_i f_i                 u_i = (cost - eta_i) p(x_i)
    subject to  L <= W_m + sum_i v[m,i] f_i <= U    per audited group m
                0 <= f_i <= 1

with (L, U) = (-delta, delta) for the additive measure and (delta-1, 0) for
the ratio measure, W_m the constant part of the group's linear form, and
v[m, i] its per-point coefficients.  Solving it yields an optimal randomized
classifier and the exact optimum that grid-searched threshold classifiers
are verified against.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..coefficients import DEFAULT_AP_MR_CONVENTION, CoefficientTable, coefficients
from ..core import DiscreteJointDistribution, FairnessDomainError, FairnessSpec
from .simplex import SimplexResult, solve_inequalities

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class FairLP:
    """Dense data of one constrained instance (see module docstring)."""

    u: np.ndarray  # (n,)
    v: np.ndarray  # (M, n)
    w: np.ndarray  # (M,)
    lower: float
    upper: float
    included: np.ndarray  # (M,) audited groups
    risk_constant: float  # (1 - cost) * P(Y=1), added back when reporting risk
    notion: str
    measure: str
    delta: float
    cost: float

    @property
    def n_vars(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    f: np.ndarray | None
    objective: float | None  # sum u_i f_i
    risk: float | None  # objective + risk_constant

    def is_fractional(self, tol: float = 1e-9) -> bool:
        """True when some optimal f_i is strictly between 0 and 1."""
        if self.f is None:
            return False
        return bool((np.minimum(self.f, 1.0 - self.f) > tol).any())


def build_lp(
    dist: DiscreteJointDistribution,
    spec: FairnessSpec,
    cost: float,
    *,
    table: CoefficientTable | None = None,
    ap_mr_convention: str = DEFAULT_AP_MR_CONVENTION,
) -> FairLP:
    """Assemble the LP for one plain-notion requirement on ``dist``."""
    if spec.notion == "EqualizedOdds":
        raise FairnessDomainError("the LP oracle handles single-notion requirements")
    marg = dist.marginals()
    if table is None:
        table = coefficients(spec.notion, spec.measure, spec.delta, marg, ap_mr_convention=ap_mr_convention)
    eta = np.where(marg.eta_defined, marg.eta, 0.0)
    u = (cost - eta) * marg.p_x

    # v[m, i] = scale * sum_{m',y} a b mass[i,m',y]/P(E) - sum_y b mass[i,m,y]/P(E)
    b = np.where(table.included[:, None], np.nan_to_num(table.b, nan=0.0), 0.0)
    a = np.nan_to_num(np.where(table.included, table.a, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(marg.p_event > 0.0, dist.mass / marg.p_event[None, :, :], 0.0)  # (n, M, 2)
    own = np.einsum("my,imy->mi", b, dens)
    pop = np.einsum("m,my,imy->i", a, b, dens)
    v = table.lambda_population_scale() * pop[None, :] - own
    v[~table.included] = np.nan
    w = np.nan_to_num(np.where(table.included[:, None], table.c, 0.0)).sum(axis=1)
    w = np.where(table.included, w, np.nan)

    if spec.measure == "MD":
        lower, upper = -spec.delta, spec.delta
    else:
        lower, upper = spec.delta - 1.0, 0.0
    return FairLP(
        u=u,
        v=v,
        w=w,
        lower=float(lower),
        upper=float(upper),
        included=table.included.copy(),
        risk_constant=(1.0 - cost) * marg.p_pos,
        notion=spec.notion,
        measure=spec.measure,
        delta=spec.delta,
        cost=cost,
    )


def _stack_rows(lp: FairLP) -> tuple[np.ndarray, np.ndarray]:
    """All <=-rows: fairness bounds both sides, then f_i <= 1 boxes."""
    n = lp.n_vars
    sel = lp.included
    v = lp.v[sel]
    w = lp.w[sel]
    a_rows = [v, -v, np.eye(n)]
    b_rows = [lp.upper - w, w - lp.lower, np.ones(n)]
    return np.vstack(a_rows), np.concatenate(b_rows)


def solve_lp(lp: FairLP) -> LPSolution:
    """Solve with the deterministic simplex; residuals are sanity-checked."""
    a_ub, b_ub = _stack_rows(lp)
    res: SimplexResult = solve_inequalities(lp.u, a_ub, b_ub)
    if res.status != "optimal":
        return LPSolution(status=res.status, f=None, objective=None, risk=None)
    f = np.clip(res.x, 0.0, 1.0)
    slack = a_ub @ f - b_ub
    if slack.max(initial=0.0) > RESIDUAL_TOL:
        raise RuntimeError(f"simplex returned an infeasible point (residual {slack.max():.3e})")
    obj = float(lp.u @ f)
    return LPSolution(status="optimal", f=f, objective=obj, risk=obj + lp.risk_constant)


def optimum_by_vertex_enumeration(lp: FairLP, tol: float = 1e-9) -> float | None:
    """Exhaustive vertex scan for n <= 3 variables; None when infeasible.

    Candidate vertices are intersections of n active hyperplanes drawn from
    the box faces and both sides of every fairness row.
    """
    n = lp.n_vars
    if n > 3:
        raise FairnessDomainError("vertex enumeration is for n <= 3")
    planes: list[tuple[np.ndarray, float]] = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        planes.append((e.copy(), 0.0))
        planes.append((e, 1.0))
    for m0 in np.flatnonzero(lp.included):
        planes.append((lp.v[m0], lp.upper - lp.w[m0]))
        planes.append((lp.v[m0], lp.lower - lp.w[m0]))
    a_ub, b_ub = _stack_rows(lp)
    best: float | None = None
    for combo in combinations(range(len(planes)), n):
        mat = np.array([planes[k][0] for k in combo])
        rhs = np.array([planes[k][1] for k in combo])
        if abs(np.linalg.det(mat)) < 1e-12:
            continue
        f = np.linalg.solve(mat, rhs)
        if (f < -tol).any() or (f > 1.0 + tol).any():
            continue
        if (a_ub @ np.clip(f, 0.0, 1.0) - b_ub).max(initial=0.0) > 1e-7:
            continue
        val = float(lp.u @ np.clip(f, 0.0, 1.0))
        if best is None or val < best:
            best = val
    return best
