"""Exact and empirical disparity measures, linear forms, and risks.

For a randomized classifier f over a finite joint law, each notion fixes an
event G and a conditioning slice (nothing for DP/AP, Y=1 for EO, Y=0 for PE;
G is the positive prediction for DP/EO/PE and the error event for AP).  The
per-group additive and multiplicative disparities are

    md_m(f) = P(G | slice) - P(G | slice, S=m)
    mr_m(f) = P(G | slice, S=m) / P(G | slice)

and the symmetrized measures take the worst case over groups and over both
f and 1-f:

    MD(f) = max_m max(md_m(f), md_m(1-f))        bounded above by delta
    MR(f) = min_m min(mr_m(f), mr_m(1-f))        bounded below by delta

Both are linear transformations of the group selection rates
P(prediction=1 | Y=y, S=m); :func:`r_md` and :func:`r_mr` evaluate those
linear forms from a coefficient table, and

    MD(f) <= delta  iff  r_md_m(f) in [-delta, delta] for every m
    MR(f) >= delta  iff  r_mr_m(f) in [delta - 1, 0]  for every m

which is what the LP verification oracle and the acceptance suite check.

Error-event probabilities for randomized f expand as
P(error | .) = E[f * 1[Y=0] + (1-f) * 1[Y=1] | .].

Ratio conventions at zero denominators: when both the population and the
group rate are zero the group ratio is reported as 1 (fair by vacuity); when
only the population rate is zero the ratio is reported as 0 and the group is
flagged, so any positive tolerance reads it as violated.  Groups whose
conditioning event has zero mass are excluded from reports with a warning,
never silently scored 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bayes import ExactMembershipOracle, instance_costs
from .coefficients import CoefficientTable, coefficients
from .core import (
    Dataset,
    DiscreteJointDistribution,
    FairnessDomainError,
    FairnessSpec,
    RandomizedClassifier,
    UndefinedMarginalError,
    rowwise_distribution,
)

#: Slack absorbing float noise in "satisfied" comparisons.
SATISFIED_SLACK = 1e-9


# ---------------------------------------------------------------------------
# Group selection rates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupRateTable:
    """P(prediction = 1 | Y=y, S=m) per cell, with zero-mass cells excluded.

    ``rate`` has shape (M, 2) indexed ``[m-1, y]``; NaN marks excluded cells,
    listed with reasons in ``excluded``.
    """

    rate: np.ndarray
    included: np.ndarray
    excluded: tuple[str, ...]

    def __post_init__(self) -> None:
        for name in ("rate", "included"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def group_rates(f: RandomizedClassifier, dist: DiscreteJointDistribution) -> GroupRateTable:
    """Exact selection rate per (y, m) cell: sum_x f(x) P(x | Y=y, S=m)."""
    acc = _accept(f, dist)
    p_event = dist.mass.sum(axis=0)  # (M, 2)
    num = np.einsum("i,imy->my", acc, dist.mass)
    included = p_event > 0.0
    rate = np.full_like(num, np.nan)
    rate[included] = num[included] / p_event[included]
    excluded = tuple(
        f"cell (y={y}, m={m0 + 1}) excluded: P(Y={y}, S={m0 + 1}) = 0"
        for m0, y in zip(*np.nonzero(~included))
    )
    return GroupRateTable(rate=rate, included=included, excluded=excluded)


def _accept(f: RandomizedClassifier, dist: DiscreteJointDistribution) -> np.ndarray:
    acc = f.accept
    if acc.shape[0] != dist.n_support:
        raise FairnessDomainError("classifier length does not match the distribution's support")
    return acc


# ---------------------------------------------------------------------------
# Notion events: population and per-group probabilities
# ---------------------------------------------------------------------------


def notion_event_rates(
    f: RandomizedClassifier, dist: DiscreteJointDistribution, notion: str
) -> tuple[float, np.ndarray, np.ndarray]:
    """(population rate, per-group rates (M,), included mask) for one notion.

    DP: P(pred=1); EO: P(pred=1 | Y=1); PE: P(pred=1 | Y=0);
    AP: P(pred != Y).  Groups with zero mass under the notion's conditioning
    (P(S=m) for DP/AP, P(Y=z, S=m) for EO/PE) are masked out.
    """
    acc = _accept(f, dist)
    mass = dist.mass
    M = dist.n_groups
    if notion in ("EO", "PE"):
        z = 1 if notion == "EO" else 0
        num_g = acc @ mass[:, :, z]  # (M,)
        den_g = mass[:, :, z].sum(axis=0)
        den_pop = float(den_g.sum())
        if den_pop <= 0.0:
            raise UndefinedMarginalError(f"P(Y={z})")
        pop = float(num_g.sum() / den_pop)
    elif notion in ("DP", "AP"):
        if notion == "DP":
            num_xg = acc[:, None] * mass.sum(axis=2)  # (n, M)
        else:
            num_xg = acc[:, None] * mass[:, :, 0] + (1.0 - acc[:, None]) * mass[:, :, 1]
        num_g = num_xg.sum(axis=0)
        den_g = mass.sum(axis=2).sum(axis=0)  # P(S=m)
        pop = float(num_g.sum())  # unconditional: denominator 1
    else:
        raise FairnessDomainError(f"unknown fairness notion {notion!r}")
    included = den_g > 0.0
    rates = np.full(M, np.nan)
    rates[included] = num_g[included] / den_g[included]
    return pop, rates, included


def md_group(f: RandomizedClassifier, dist: DiscreteJointDistribution, notion: str, m: int) -> float:
    """Additive disparity of group m: population rate minus group rate."""
    pop, rates, included = notion_event_rates(f, dist, notion)
    if not included[m - 1]:
        raise UndefinedMarginalError(f"group {m} conditioning event for {notion}")
    return pop - float(rates[m - 1])


def mr_group(f: RandomizedClassifier, dist: DiscreteJointDistribution, notion: str, m: int) -> float:
    """Multiplicative disparity of group m (ratio conventions per module doc)."""
    pop, rates, included = notion_event_rates(f, dist, notion)
    if not included[m - 1]:
        raise UndefinedMarginalError(f"group {m} conditioning event for {notion}")
    return _ratio(float(rates[m - 1]), pop)


def _ratio(group: float, pop: float) -> float:
    if pop > 0.0:
        return group / pop
    return 1.0 if group == 0.0 else 0.0


# ---------------------------------------------------------------------------
# Symmetrized reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NotionReport:
    """Per-group disparities of f and 1-f for one notion, plus the worst case."""

    notion: str
    measure: str
    per_group: np.ndarray
    per_group_flipped: np.ndarray
    included: np.ndarray
    excluded: tuple[str, ...]
    value: float

    def __post_init__(self) -> None:
        for name in ("per_group", "per_group_flipped", "included"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class FairnessReport:
    """Symmetrized disparity verdict for one fairness requirement.

    ``parts`` holds one :class:`NotionReport` for a plain notion, or the EO
    and PE parts for the composite equalized-odds requirement (satisfied only
    when both parts are).
    """

    notion: str
    measure: str
    delta: float
    parts: tuple[NotionReport, ...]
    value: float
    satisfied: bool

    def to_dict(self) -> dict:
        """Plain-types record (the documented serialization format)."""
        return {
            "notion": self.notion,
            "measure": self.measure,
            "delta": self.delta,
            "value": self.value,
            "satisfied": bool(self.satisfied),
            "parts": [
                {
                    "notion": p.notion,
                    "per_group": [None if not ok else float(v) for v, ok in zip(p.per_group, p.included)],
                    "per_group_flipped": [
                        None if not ok else float(v) for v, ok in zip(p.per_group_flipped, p.included)
                    ],
                    "excluded": list(p.excluded),
                    "value": p.value,
                }
                for p in self.parts
            ],
        }


def _notion_report(
    f: RandomizedClassifier, dist: DiscreteJointDistribution, notion: str, measure: str
) -> NotionReport:
    pop, rates, included = notion_event_rates(f, dist, notion)
    pop_flip, rates_flip, _ = notion_event_rates(f.flipped(), dist, notion)
    if not included.any():
        raise FairnessDomainError(f"no group has positive mass under the {notion} conditioning")
    excluded = tuple(
        f"group {m0 + 1} excluded: zero-mass conditioning event for {notion}"
        for m0 in np.flatnonzero(~included)
    )
    if measure == "MD":
        vals = pop - rates
        vals_flip = pop_flip - rates_flip
        value = float(np.maximum(vals[included], vals_flip[included]).max())
    else:
        vals = np.array([_ratio(g, pop) for g in rates])
        vals_flip = np.array([_ratio(g, pop_flip) for g in rates_flip])
        value = float(np.minimum(vals[included], vals_flip[included]).min())
    return NotionReport(
        notion=notion,
        measure=measure,
        per_group=vals,
        per_group_flipped=vals_flip,
        included=included,
        excluded=excluded,
        value=value,
    )


def symmetrized(
    f: RandomizedClassifier, dist: DiscreteJointDistribution, spec: FairnessSpec
) -> FairnessReport:
    """Symmetrized disparity of f against ``spec``, with the satisfied verdict.

    The verdict uses a 1e-9 slack: MD satisfied iff value <= delta + slack,
    MR satisfied iff value >= delta - slack.
    """
    parts = tuple(_notion_report(f, dist, n, spec.measure) for n in spec.component_notions)
    if spec.measure == "MD":
        value = max(p.value for p in parts)
        satisfied = value <= spec.delta + SATISFIED_SLACK
    else:
        value = min(p.value for p in parts)
        satisfied = value >= spec.delta - SATISFIED_SLACK
    return FairnessReport(
        notion=spec.notion,
        measure=spec.measure,
        delta=spec.delta,
        parts=parts,
        value=value,
        satisfied=satisfied,
    )


# ---------------------------------------------------------------------------
# Linear forms over group rates
# ---------------------------------------------------------------------------


def _linear_forms(
    f: RandomizedClassifier, dist: DiscreteJointDistribution, table: CoefficientTable
) -> np.ndarray:
    rates = group_rates(f, dist)
    b = np.where(table.included[:, None], np.nan_to_num(table.b, nan=0.0), 0.0)
    a = np.nan_to_num(np.where(table.included, table.a, 0.0))
    needed = b != 0.0
    if np.isnan(rates.rate[needed]).any():
        raise UndefinedMarginalError("selection rate for a cell required by a nonzero coefficient")
    safe = np.where(needed, np.nan_to_num(rates.rate, nan=0.0), 0.0)
    pop = float((a[:, None] * b * safe).sum())  # sum over m', y of a b rate
    own = (b * safe).sum(axis=1)  # (M,)
    cvals = np.nan_to_num(np.where(table.included[:, None], table.c, 0.0)).sum(axis=1)
    out = table.lambda_population_scale() * pop - own + cvals
    return np.where(table.included, out, np.nan)


def r_md_all(f: RandomizedClassifier, dist: DiscreteJointDistribution, table: CoefficientTable) -> np.ndarray:
    """Additive-measure linear form per group (equals md_group exactly)."""
    if table.measure != "MD":
        raise FairnessDomainError("r_md needs an MD coefficient table")
    return _linear_forms(f, dist, table)


def r_md(f: RandomizedClassifier, dist: DiscreteJointDistribution, table: CoefficientTable, m: int) -> float:
    out = r_md_all(f, dist, table)[m - 1]
    if np.isnan(out):
        raise UndefinedMarginalError(f"group {m} excluded from the coefficient table")
    return float(out)


def r_mr_all(
    f: RandomizedClassifier, dist: DiscreteJointDistribution, table: CoefficientTable
) -> np.ndarray:
    """Ratio-measure linear form per group.

    Equals delta * P(G | slice) - P(G | slice, S=m); the requirement holds
    iff every group's value lies in [delta - 1, 0].
    """
    if table.measure != "MR":
        raise FairnessDomainError("r_mr needs an MR coefficient table")
    return _linear_forms(f, dist, table)


def r_mr(
    f: RandomizedClassifier,
    dist: DiscreteJointDistribution,
    table: CoefficientTable,
    m: int,
    delta: float | None = None,
) -> float:
    if delta is not None and abs(delta - table.delta) > 1e-12:
        raise FairnessDomainError("delta disagrees with the coefficient table's delta")
    out = r_mr_all(f, dist, table)[m - 1]
    if np.isnan(out):
        raise UndefinedMarginalError(f"group {m} excluded from the coefficient table")
    return float(out)


# ---------------------------------------------------------------------------
# Risks
# ---------------------------------------------------------------------------


def cs_risk(f: RandomizedClassifier, dist: DiscreteJointDistribution, cost: float) -> float:
    """Cost-sensitive risk (1-c) P(pred=0, Y=1) + c P(pred=1, Y=0)."""
    if not 0.0 <= cost <= 1.0:
        raise FairnessDomainError(f"cost must lie in [0, 1], got {cost}")
    acc = _accept(f, dist)
    fn = float(((1.0 - acc) * dist.mass[:, :, 1].sum(axis=1)).sum())
    fp = float((acc * dist.mass[:, :, 0].sum(axis=1)).sum())
    return (1.0 - cost) * fn + cost * fp


def accuracy(f: RandomizedClassifier, dist: DiscreteJointDistribution) -> float:
    """P(pred = Y); equals 1 - 2 * cs_risk at cost 1/2."""
    return 1.0 - 2.0 * cs_risk(f, dist, 0.5)


def fair_cs_risk(
    f: RandomizedClassifier,
    dist: DiscreteJointDistribution,
    lam: np.ndarray,
    cost: float,
    spec: FairnessSpec,
) -> float:
    """Instance-cost-weighted mistake rate sum_y E[c_y(x) P(pred=1-y, Y=y | x)].

    The instance costs come from the threshold correction for ``spec``; up to
    an f-independent constant this equals cs_risk minus the lam-weighted sum
    of the per-group linear forms.  Composite notions are out of scope here
    (they carry two multiplier vectors).
    """
    if spec.notion not in ("DP", "EO", "PE", "AP"):
        raise FairnessDomainError("fair_cs_risk handles single-notion requirements only")
    acc = _accept(f, dist)
    marg = dist.marginals()
    oracle = ExactMembershipOracle(dist)
    table = coefficients(spec.notion, spec.measure, spec.delta, marg)
    live = marg.p_x > 0.0
    c0 = np.zeros(dist.n_support)
    c0[live], _ = instance_costs(oracle.ratios[live], table, np.asarray(lam, dtype=float), cost)
    eta = np.where(live, marg.eta, 0.0)
    fp_term = c0 * acc * (1.0 - eta)
    fn_term = (1.0 - c0) * (1.0 - acc) * eta
    return float(((fp_term + fn_term) * marg.p_x).sum())


# ---------------------------------------------------------------------------
# Empirical reports on datasets
# ---------------------------------------------------------------------------


def empirical_report(
    predictions: np.ndarray, dataset: Dataset, spec: FairnessSpec
) -> FairnessReport:
    """Symmetrized report with empirical frequencies in place of exact masses.

    ``predictions`` holds one acceptance probability (or hard 0/1 label) per
    dataset row.  Each row becomes its own support point of the empirical
    law, so the formulas are identical to the exact path.
    """
    preds = np.asarray(predictions, dtype=float)
    if preds.shape != (dataset.n_rows,):
        raise FairnessDomainError("need one prediction per dataset row")
    return symmetrized(RandomizedClassifier(preds), rowwise_distribution(dataset), spec)
