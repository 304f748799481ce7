"""Risk-optimal fair classifiers as instance-dependent threshold rules.

The constrained risk minimizer under a bounded group disparity is a
thresholding of the class probability eta(x) = P(Y=1|X=x) with a correction
built from normalized membership ratios

    gamma[m, y](x) = P(Y=y, S=m | X=x) / P(Y=y, S=m).

With multipliers lam in R^M (one per group, sign-free) and their sum L, the
score is

    H(x) = eta(x) - cost - sum_{m,y} b[m,y] * (lam_m - scale * L * a_m) * gamma[m,y](x)

where (a, b) come from the notion's coefficient table and ``scale`` is 1 for
the additive measure and delta for the ratio measure.  The classifier
predicts 1 when H > 0, 0 when H < 0, and flips an alpha-weighted coin on
exact zeros (|H| <= 1e-12).  At lam = 0 this is the plain cost-threshold
rule 1[eta(x) > cost].

Because H is affine in lam, every score here is exposed both as a direct
evaluation and through :func:`correction_columns`, which returns the matrix
B with H = eta - cost - B @ lam.  Grid searches and the verification oracle
rely on that form.

The same correction defines instance-dependent costs: with
Q(x) = B @ lam, the pair (cost + Q(x), 1 - cost - Q(x)) prices false
positives and false negatives per instance, and sign(eta - cost - Q) equals
sign(H) everywhere.  Cost-sensitive training with these weights therefore
recovers the same classifier (the in-processing route).

Composite equalized odds subtracts two corrections (one EO, one PE).  A
sign-flipped circulating variant scales the PE term by an extra
1/P(Y=0, S=m); that variant is inconsistent with per-instance optimality of
the two-constraint Lagrangian (``fairthresh.oracle.verify.resolve_eodds_normalization``
checks this on unbalanced instances), so the unscaled form is the default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .coefficients import CoefficientTable
from .core import (
    DiscreteJointDistribution,
    FairnessDomainError,
    MarginalSet,
    UndefinedMarginalError,
)

TIE_TOL = 1e-12

PE_FORMS = ("plain", "rescaled")
DEFAULT_PE_FORM = "plain"


# ---------------------------------------------------------------------------
# Membership ratios gamma[m, y](x)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactMembershipOracle:
    """gamma[m, y] over a finite distribution's support, from exact masses.

    ``ratios`` has shape (n, M, 2); entries are NaN where P(Y=y, S=m) = 0 or
    the support point itself has zero mass.  For points and cells with
    positive mass, sum_{m,y} ratios[i, m, y] * P(E[y, m]) = 1.
    """

    dist: DiscreteJointDistribution
    marg: MarginalSet = field(init=False)
    ratios: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        marg = self.dist.marginals()
        p_event = marg.p_event  # (M, 2)
        p_x = marg.p_x  # (n,)
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = self.dist.mass / p_x[:, None, None]
            ratios = cond / p_event[None, :, :]
        ratios[p_x <= 0.0] = np.nan
        ratios[:, p_event <= 0.0] = np.nan
        ratios.setflags(write=False)
        object.__setattr__(self, "marg", marg)
        object.__setattr__(self, "ratios", ratios)

    @property
    def eta(self) -> np.ndarray:
        return self.marg.eta


# ---------------------------------------------------------------------------
# Threshold scores (attribute-blind)
# ---------------------------------------------------------------------------


def _effective_b(table: CoefficientTable) -> np.ndarray:
    """b with excluded-group rows zeroed, so their terms drop out of sums."""
    b = np.where(table.included[:, None], table.b, 0.0)
    return np.nan_to_num(b, nan=0.0)


def _group_terms(ratios: np.ndarray, table: CoefficientTable) -> np.ndarray:
    """g[i, m] = sum_y b[m, y] * gamma[i, m, y], skipping zero coefficients."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.ndim == 2:
        ratios = ratios[None, :, :]
    b = _effective_b(table)
    needed = b != 0.0
    if np.isnan(ratios[:, needed]).any():
        raise UndefinedMarginalError("gamma[m,y] with zero-mass event required by a nonzero coefficient")
    safe = np.where(needed[None, :, :], np.nan_to_num(ratios, nan=0.0), 0.0)
    return np.einsum("my,imy->im", b, safe)


def correction_columns(ratios: np.ndarray, table: CoefficientTable) -> np.ndarray:
    """Matrix B with threshold correction = B @ lam (shape (n, M)).

    B[i, m] = g[i, m] - scale * G[i], where g[i, m] = sum_y b[m,y] gamma[i,m,y],
    G[i] = sum_m a_m g[i, m], and scale is delta for the ratio measure.
    Columns of excluded groups are zero: their multipliers are inert.
    """
    g = _group_terms(ratios, table)
    a = np.where(table.included, table.a, 0.0)
    pop = g @ np.nan_to_num(a, nan=0.0)
    cols = g - table.lambda_population_scale() * pop[:, None]
    cols[:, ~table.included] = 0.0
    return cols


def threshold_correction(ratios: np.ndarray, table: CoefficientTable, lam: np.ndarray) -> np.ndarray:
    """The lam-weighted correction sum_{m,y} b (lam_m - scale*L*a_m) gamma."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (table.n_groups,):
        raise FairnessDomainError(f"lam must have length {table.n_groups}, got shape {lam.shape}")
    if not np.isfinite(lam).all():
        raise FairnessDomainError("lam entries must be finite")
    return correction_columns(ratios, table) @ lam


def scores_md(
    eta: np.ndarray, ratios: np.ndarray, table: CoefficientTable, lam: np.ndarray, cost: float
) -> np.ndarray:
    """H(x) = eta - cost - correction, additive-measure weighting."""
    if table.measure != "MD":
        raise FairnessDomainError("scores_md needs an MD coefficient table")
    return np.asarray(eta, dtype=float) - cost - threshold_correction(ratios, table, lam)


def scores_mr(
    eta: np.ndarray,
    ratios: np.ndarray,
    table: CoefficientTable,
    lam: np.ndarray,
    cost: float,
    delta: float,
) -> np.ndarray:
    """H(x) for the ratio measure: population term scaled by delta."""
    if table.measure != "MR":
        raise FairnessDomainError("scores_mr needs an MR coefficient table")
    if abs(table.delta - delta) > 1e-12:
        raise FairnessDomainError("delta disagrees with the coefficient table's delta")
    return np.asarray(eta, dtype=float) - cost - threshold_correction(ratios, table, lam)


def instance_costs(
    ratios: np.ndarray, table: CoefficientTable, lam: np.ndarray, cost: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-instance false-positive / false-negative prices (c0, c1).

    c0(x) = cost + Q(x) with Q the threshold correction; c1 = 1 - c0.  The
    induced rule 1[eta > c0] coincides with the threshold classifier.
    """
    q = threshold_correction(ratios, table, lam)
    c0 = cost + q
    return c0, 1.0 - c0


# ---------------------------------------------------------------------------
# Attribute-aware scores
# ---------------------------------------------------------------------------


def aware_correction_columns(
    p_y_given_xs: np.ndarray,
    group: np.ndarray,
    p_event: np.ndarray,
    table: CoefficientTable,
) -> np.ndarray:
    """Correction columns when the group of each instance is observed.

    ``p_y_given_xs[i, y]`` is P(Y=y | X=x_i, S=s_i) and ``group[i]`` the
    1-based group of instance i.  Only the owning group's term survives:
    gamma reduces to P(Y=y|x,s)/P(Y=y,S=s) at m = s and 0 elsewhere.
    """
    p_y_given_xs = np.asarray(p_y_given_xs, dtype=float)
    group = np.asarray(group, dtype=int)
    n = p_y_given_xs.shape[0]
    if group.shape != (n,):
        raise FairnessDomainError("group must have one entry per instance")
    m0 = group - 1
    if (m0 < 0).any() or (m0 >= table.n_groups).any():
        raise FairnessDomainError("group labels must lie in 1..M")
    if not table.included[m0].all():
        raise FairnessDomainError("an instance belongs to a group excluded from the coefficient table")
    b = _effective_b(table)[m0]  # (n, 2)
    pe = np.asarray(p_event, dtype=float)[m0]  # (n, 2)
    needed = b != 0.0
    if (pe[needed] <= 0.0).any():
        raise UndefinedMarginalError("P(Y=y, S=s) = 0 for an observed (y, s) cell")
    with np.errstate(divide="ignore", invalid="ignore"):
        gam = np.where(needed, p_y_given_xs / pe, 0.0)
    g = (b * gam).sum(axis=1)  # (n,)
    a_own = np.nan_to_num(np.where(table.included, table.a, 0.0))[m0]
    scale = table.lambda_population_scale()
    cols = -scale * (a_own * g)[:, None] * np.ones((1, table.n_groups))
    cols[np.arange(n), m0] += g
    cols[:, ~table.included] = 0.0
    return cols


def scores_aware(
    eta_xs: np.ndarray,
    group: np.ndarray,
    p_event: np.ndarray,
    table: CoefficientTable,
    lam: np.ndarray,
    cost: float,
) -> np.ndarray:
    """H(x, s) = eta(x, s) - cost - own-group correction.

    ``eta_xs[i]`` is P(Y=1 | X=x_i, S=s_i).  The measure and delta are those
    of ``table``.  Per group, H is affine in eta(x, s), so the decision is a
    group-wise constant threshold on the class probability.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (table.n_groups,):
        raise FairnessDomainError(f"lam must have length {table.n_groups}, got shape {lam.shape}")
    eta_xs = np.asarray(eta_xs, dtype=float)
    p_y = np.stack([1.0 - eta_xs, eta_xs], axis=1)
    cols = aware_correction_columns(p_y, group, p_event, table)
    return eta_xs - cost - cols @ lam


# ---------------------------------------------------------------------------
# Composite equalized odds and independent (per-feature) fairness
# ---------------------------------------------------------------------------


def _columns_from_values(vals: np.ndarray, table: CoefficientTable) -> np.ndarray:
    a = np.nan_to_num(np.where(table.included, table.a, 0.0))
    pop = vals @ a
    cols = vals - pop[:, None]
    cols[:, ~table.included] = 0.0
    return cols


def equalized_odds_columns(
    ratios: np.ndarray,
    eo_table: CoefficientTable,
    pe_table: CoefficientTable,
    p_event: np.ndarray | None = None,
    pe_form: str = DEFAULT_PE_FORM,
) -> np.ndarray:
    """Stacked correction columns for (lam_eo, lam_pe), shape (n, 2M).

    ``pe_form="plain"`` uses the PE ratios as-is (the default, consistent
    with joint Lagrangian optimality); ``"rescaled"`` divides each group's PE
    ratio by P(Y=0, S=m) once more, a circulating variant kept only so the
    verification oracle can disprove it.
    """
    if pe_form not in PE_FORMS:
        raise FairnessDomainError(f"unknown pe_form {pe_form!r}")
    if eo_table.notion != "EO" or pe_table.notion != "PE":
        raise FairnessDomainError("equalized odds needs one EO and one PE table")
    cols_eo = correction_columns(ratios, eo_table)
    if pe_form == "plain":
        cols_pe = correction_columns(ratios, pe_table)
    else:
        if p_event is None:
            raise FairnessDomainError("rescaled PE form needs the P(Y=y, S=m) table")
        g = _group_terms(ratios, pe_table)  # PE ratios: gamma[m, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(pe_table.included[None, :], g / np.asarray(p_event)[None, :, 0], 0.0)
        cols_pe = _columns_from_values(vals, pe_table)
    return np.concatenate([cols_eo, cols_pe], axis=1)


def scores_equalized_odds(
    eta: np.ndarray,
    ratios: np.ndarray,
    eo_table: CoefficientTable,
    pe_table: CoefficientTable,
    lam_eo: np.ndarray,
    lam_pe: np.ndarray,
    cost: float,
    p_event: np.ndarray | None = None,
    pe_form: str = DEFAULT_PE_FORM,
) -> np.ndarray:
    """eta - cost minus both the EO and the PE corrections."""
    lam = np.concatenate([np.asarray(lam_eo, dtype=float), np.asarray(lam_pe, dtype=float)])
    cols = equalized_odds_columns(ratios, eo_table, pe_table, p_event=p_event, pe_form=pe_form)
    if lam.shape != (cols.shape[1],):
        raise FairnessDomainError("lam_eo and lam_pe must each have one entry per group")
    return np.asarray(eta, dtype=float) - cost - cols @ lam


def independent_columns(parts: list[tuple[np.ndarray, CoefficientTable]]) -> np.ndarray:
    """Stacked correction columns over per-feature constraint sets.

    Each part is (ratios_k, table_k) for one sensitive feature's own group
    structure; the result has one block of columns per feature, so
    H = eta - cost - cols @ concat(lams).
    """
    if not parts:
        raise FairnessDomainError("at least one per-feature part is required")
    return np.concatenate([correction_columns(r, t) for r, t in parts], axis=1)


def scores_independent(
    eta: np.ndarray,
    parts: list[tuple[np.ndarray, CoefficientTable]],
    lams: list[np.ndarray],
    cost: float,
) -> np.ndarray:
    """eta - cost minus one correction per sensitive feature.

    With a single feature this is exactly the composite-group score.
    Additive-measure tables only.
    """
    if len(parts) != len(lams):
        raise FairnessDomainError("need one multiplier vector per feature part")
    for _, t in parts:
        if t.measure != "MD":
            raise FairnessDomainError("independent fairness scores use additive-measure tables")
    lam = np.concatenate([np.asarray(l, dtype=float) for l in lams])
    return np.asarray(eta, dtype=float) - cost - independent_columns(parts) @ lam


# ---------------------------------------------------------------------------
# Threshold classifier container
# ---------------------------------------------------------------------------


def apply_threshold(
    scores: np.ndarray,
    alpha: float = 0.0,
    rng: np.random.Generator | None = None,
    tie_tol: float = TIE_TOL,
) -> np.ndarray:
    """Predictions from scores: 1 if H > 0, 0 if H < 0, Bernoulli(alpha) ties.

    Exact zeros are |H| <= tie_tol.  With alpha strictly between 0 and 1 a
    generator must be supplied when ties actually occur.
    """
    scores = np.asarray(scores, dtype=float)
    if not np.isfinite(scores).all():
        raise FairnessDomainError("scores must be finite")
    if not 0.0 <= alpha <= 1.0:
        raise FairnessDomainError("alpha must lie in [0, 1]")
    pred = (scores > tie_tol).astype(int)
    ties = np.abs(scores) <= tie_tol
    if ties.any() and alpha > 0.0:
        if alpha >= 1.0:
            pred[ties] = 1
        else:
            if rng is None:
                raise FairnessDomainError("randomized ties need a random generator")
            pred[ties] = (rng.random(int(ties.sum())) < alpha).astype(int)
    return pred


@dataclass(frozen=True)
class ThresholdClassifier:
    """A score function plus a tie parameter and its provenance.

    ``score_fn`` maps a feature matrix (or support-index array, for exact
    tabular use) to scores.  ``provenance`` records how the classifier was
    built (notion, measure, multipliers, cost, delta, model references) and
    is what gets serialized.
    """

    score_fn: Callable[[np.ndarray], np.ndarray]
    alpha: float = 0.0
    provenance: Mapping[str, object] = field(default_factory=dict)

    def scores(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.score_fn(x), dtype=float)

    def classify(self, x: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        return apply_threshold(self.scores(x), alpha=self.alpha, rng=rng)
