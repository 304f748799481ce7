"""Ground-truth verification: LP formulation, simplex, brute force, resolvers."""

from .instances import random_classifier, random_distribution, random_multipliers
from .lp import FairLP, LPSolution, build_lp, optimum_by_vertex_enumeration, solve_lp
from .simplex import SimplexResult, solve_inequalities
from .verify import (
    CheckResult,
    enumerate_deterministic,
    lagrangian_objective,
    lagrangian_values,
    resolve_ap_mr_sign,
    resolve_eodds_normalization,
    run_property_suite,
)

__all__ = [
    "CheckResult",
    "FairLP",
    "LPSolution",
    "SimplexResult",
    "build_lp",
    "enumerate_deterministic",
    "lagrangian_objective",
    "lagrangian_values",
    "optimum_by_vertex_enumeration",
    "random_classifier",
    "random_distribution",
    "random_multipliers",
    "resolve_ap_mr_sign",
    "resolve_eodds_normalization",
    "run_property_suite",
    "solve_inequalities",
    "solve_lp",
]
