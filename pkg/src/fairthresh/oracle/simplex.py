"""Dense two-phase simplex for small inequality-form linear programs.

Solves   minimize c.x   subject to   A x <= b,  x >= 0

via a full tableau with Bland's anti-cycling rule (entering: lowest-index
negative reduced cost; leaving: lowest-index basic variable among minimum
ratios), so every solve is deterministic.  Rows with negative right-hand
sides get an artificial variable and a phase-1 feasibility solve.  Problem
sizes here are tiny (tens of rows), so clarity beats sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-9
MAX_ITER = 20_000


@dataclass(frozen=True)
class SimplexResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None


def solve_inequalities(cost: np.ndarray, a_ub: np.ndarray, b_ub: np.ndarray) -> SimplexResult:
    """Minimize ``cost . x`` over ``a_ub x <= b_ub``, ``x >= 0``."""
    cost = np.asarray(cost, dtype=float)
    b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
    a_ub = np.asarray(a_ub, dtype=float).reshape(b_ub.size, cost.size)
    m, n = a_ub.shape

    neg = b_ub < 0.0
    rows = np.where(neg[:, None], -a_ub, a_ub)
    rhs = np.where(neg, -b_ub, b_ub)
    slack_sign = np.where(neg, -1.0, 1.0)
    art_rows = np.flatnonzero(neg)
    n_art = art_rows.size
    total = n + m + n_art

    tableau = np.zeros((m, total))
    tableau[:, :n] = rows
    tableau[np.arange(m), n + np.arange(m)] = slack_sign
    tableau[art_rows, n + m + np.arange(n_art)] = 1.0

    basis = np.empty(m, dtype=int)
    basis[~neg] = n + np.flatnonzero(~neg)
    basis[neg] = n + m + np.arange(n_art)
    rhs = rhs.astype(float)

    if n_art:
        phase1 = np.zeros(total)
        phase1[n + m :] = 1.0
        status = _iterate(tableau, rhs, basis, phase1, allowed=total)
        if status != "optimal" or float(phase1[basis] @ rhs) > FEAS_TOL:
            return SimplexResult("infeasible", None, None)
        _expel_artificials(tableau, rhs, basis, n + m)

    phase2 = np.zeros(total)
    phase2[:n] = cost
    status = _iterate(tableau, rhs, basis, phase2, allowed=n + m)
    if status == "unbounded":
        return SimplexResult("unbounded", None, None)
    x_full = np.zeros(total)
    x_full[basis] = rhs
    x = x_full[:n]
    return SimplexResult("optimal", x, float(cost @ x))


def _iterate(tableau: np.ndarray, rhs: np.ndarray, basis: np.ndarray, cost: np.ndarray, allowed: int) -> str:
    """Run simplex iterations in place; ``allowed`` caps entering columns."""
    m = tableau.shape[0]
    for _ in range(MAX_ITER):
        reduced = cost[:allowed] - cost[basis] @ tableau[:, :allowed]
        in_basis = np.zeros(allowed, dtype=bool)
        in_basis[basis[basis < allowed]] = True
        candidates = np.flatnonzero((reduced < -PIVOT_TOL) & ~in_basis)
        if candidates.size == 0:
            return "optimal"
        j = int(candidates[0])  # Bland: lowest index
        col = tableau[:, j]
        usable = col > PIVOT_TOL
        if not usable.any():
            return "unbounded"
        ratios = np.full(m, np.inf)
        ratios[usable] = rhs[usable] / col[usable]
        best = ratios.min()
        ties = np.flatnonzero(np.isclose(ratios, best, rtol=0.0, atol=PIVOT_TOL))
        r = int(ties[np.argmin(basis[ties])])  # Bland: lowest basic index
        _pivot(tableau, rhs, basis, r, j)
    raise RuntimeError("simplex iteration limit exceeded")


def _pivot(tableau: np.ndarray, rhs: np.ndarray, basis: np.ndarray, r: int, j: int) -> None:
    piv = tableau[r, j]
    tableau[r] /= piv
    rhs[r] /= piv
    for i in range(tableau.shape[0]):
        if i != r and tableau[i, j] != 0.0:
            factor = tableau[i, j]
            tableau[i] -= factor * tableau[r]
            rhs[i] -= factor * rhs[r]
    basis[r] = j


def _expel_artificials(tableau: np.ndarray, rhs: np.ndarray, basis: np.ndarray, n_real: int) -> None:
    """Pivot zero-level artificials out of the basis where possible.

    A row whose artificial cannot be expelled is redundant; the artificial
    stays basic at level zero and is simply never allowed to re-enter.
    """
    for r in range(tableau.shape[0]):
        if basis[r] >= n_real:
            row = tableau[r, :n_real]
            cand = np.flatnonzero(np.abs(row) > PIVOT_TOL)
            if cand.size:
                _pivot(tableau, rhs, basis, r, int(cand[0]))
