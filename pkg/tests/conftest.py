"""Shared fixtures and independent brute-force references.

The ``brute_*`` helpers recompute probabilities with plain Python loops over
joint-mass cells, deliberately sharing no code with the library: tests
freeze their outputs as expected values.
"""

from __future__ import annotations

import numpy as np
import pytest

from fairthresh.core import DiscreteJointDistribution


def d1_distribution() -> DiscreteJointDistribution:
    """Two-point, two-group fixture used across modules.

    Masses (x, s, y): (x0,1,0)=.15 (x0,1,1)=.10 (x0,2,0)=.20 (x0,2,1)=.05
                      (x1,1,0)=.05 (x1,1,1)=.20 (x1,2,0)=.10 (x1,2,1)=.15
    Note x and s are marginally independent here (every (x, s) cell has mass
    .25), so DP disparities vanish for every classifier while EO/PE ones do
    not.
    """
    mass = np.zeros((2, 2, 2))
    entries = {
        (0, 1, 0): 0.15, (0, 1, 1): 0.10, (0, 2, 0): 0.20, (0, 2, 1): 0.05,
        (1, 1, 0): 0.05, (1, 1, 1): 0.20, (1, 2, 0): 0.10, (1, 2, 1): 0.15,
    }
    for (i, s, y), p in entries.items():
        mass[i, s - 1, y] = p
    return DiscreteJointDistribution(support=("x0", "x1"), mass=mass)


@pytest.fixture
def d1() -> DiscreteJointDistribution:
    return d1_distribution()


# ---------------------------------------------------------------------------
# Brute-force references (loops only, no library calls)
# ---------------------------------------------------------------------------


def brute_event_rates(mass: np.ndarray, accept, notion: str):
    """(population rate, per-group rates) for a notion, by direct summation.

    ``accept[i]`` is the acceptance probability at support point i.  Group
    rates are None where the conditioning event has zero mass.
    """
    n, M, _ = mass.shape
    pop_num = pop_den = 0.0
    g_num = [0.0] * M
    g_den = [0.0] * M
    for i in range(n):
        for s in range(M):
            for y in (0, 1):
                p = mass[i, s, y]
                if notion == "DP":
                    ind, keep = accept[i], True
                elif notion == "EO":
                    ind, keep = accept[i], y == 1
                elif notion == "PE":
                    ind, keep = accept[i], y == 0
                elif notion == "AP":
                    ind, keep = (accept[i] if y == 0 else 1.0 - accept[i]), True
                else:
                    raise ValueError(notion)
                if keep:
                    pop_num += ind * p
                    pop_den += p
                    g_num[s] += ind * p
                    g_den[s] += p
    pop = pop_num / pop_den
    groups = [g_num[s] / g_den[s] if g_den[s] > 0 else None for s in range(M)]
    return pop, groups


def brute_symmetrized_md(mass: np.ndarray, accept, notion: str) -> float:
    worst = -np.inf
    for acc in (list(accept), [1.0 - a for a in accept]):
        pop, groups = brute_event_rates(mass, acc, notion)
        for g in groups:
            if g is not None:
                worst = max(worst, pop - g)
    return worst


def brute_symmetrized_mr(mass: np.ndarray, accept, notion: str) -> float:
    best = np.inf
    for acc in (list(accept), [1.0 - a for a in accept]):
        pop, groups = brute_event_rates(mass, acc, notion)
        for g in groups:
            if g is None:
                continue
            if pop > 0:
                best = min(best, g / pop)
            else:
                best = min(best, 1.0 if g == 0 else 0.0)
    return best


def brute_cs_risk(mass: np.ndarray, accept, cost: float) -> float:
    n, M, _ = mass.shape
    fn = sum((1.0 - accept[i]) * mass[i, s, 1] for i in range(n) for s in range(M))
    fp = sum(accept[i] * mass[i, s, 0] for i in range(n) for s in range(M))
    return (1.0 - cost) * fn + cost * fp
