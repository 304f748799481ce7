"""Linear-form coefficients for group-disparity measures.

Every supported notion's disparity is a linear transformation of the group
selection rates P(prediction = 1 | Y = y, S = m).  The transformation is

    sum_y { [sum_m' a_m' * b_m'^y * rate(y, m')] - b_m^y * rate(y, m) + c_m^y }

(with the bracketed population term scaled by delta for the ratio measure).
This module produces the (a, b, c) tables per notion:

    notion  a_m              b_m^y                    c_m^y (MD) / (MR)
    DP      P(S=m)           P(Y=y|S=m)               0 / 0
    EO      P(S=m|Y=1)       y                        0 / 0
    PE      P(S=m|Y=0)       1 - y                    0 / 0
    AP      P(S=m)           (1-2y) * P(Y=y|S=m)      see below

For AP the additive measure uses c_m^y = (1-y) p+ - y P(Y=1|S=m) and the
ratio measure uses c_m^y = delta (1-y) p+ - y P(Y=1|S=m), where p+ = P(Y=1).
The ratio constant also circulates in a sign-flipped variant,
(y-1) delta p+ + y P(Y=1|S=m); the two cannot both be right, and only the
first makes the ratio linear form equal delta * P(err) - P(err | S=m) on
finite instances.  ``fairthresh.oracle.verify.resolve_ap_mr_sign`` checks
this numerically; the resolved convention is the default here and is
recorded in the table's metadata.

Groups whose conditioning event has zero mass cannot be audited; they are
excluded from the table with a warning record rather than producing
coefficients from undefined marginals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    NOTIONS,
    FairnessDomainError,
    MarginalSet,
    UndefinedMarginalError,
)

#: Resolved AP/MR constant convention (see module docstring and the oracle
#: resolver).  "flipped" keeps the sign-opposite variant available for the
#: resolver to disprove.
AP_MR_CONVENTIONS = ("resolved", "flipped")
DEFAULT_AP_MR_CONVENTION = "resolved"


@dataclass(frozen=True)
class CoefficientTable:
    """The (a, b, c) linear-form coefficients for one notion and measure.

    ``a`` has shape (M,), ``b`` and ``c`` shape (M, 2) indexed ``[m-1, y]``.
    ``included[m-1]`` is False for groups excluded because their conditioning
    event has zero mass; their rows are NaN and ``warnings`` says why.
    ``delta`` is only material for the (AP, MR) constant but is always stored
    so the constructor signature is uniform.
    """

    notion: str
    measure: str
    delta: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    included: np.ndarray
    warnings: tuple[str, ...]
    ap_mr_convention: str = DEFAULT_AP_MR_CONVENTION

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "included"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_groups(self) -> int:
        return self.a.shape[0]

    def lambda_population_scale(self) -> float:
        """Scale on the population term: delta for MR, 1 for MD."""
        return self.delta if self.measure == "MR" else 1.0


def coefficients(
    notion: str,
    measure: str,
    delta: float,
    marg: MarginalSet,
    *,
    ap_mr_convention: str = DEFAULT_AP_MR_CONVENTION,
) -> CoefficientTable:
    """Build the coefficient table for ``notion`` and ``measure``.

    Raises :class:`UndefinedMarginalError` when a marginal the whole table
    needs is undefined (e.g. EO with no positive labels at all); groups with
    zero-mass conditioning events are excluded with a warning instead.
    """
    if notion not in NOTIONS:
        raise FairnessDomainError(f"no coefficient table for notion {notion!r}")
    if measure not in ("MD", "MR"):
        raise FairnessDomainError(f"unknown measure {measure!r}")
    if not 0.0 <= delta <= 1.0:
        raise FairnessDomainError(f"delta must lie in [0, 1], got {delta}")
    if ap_mr_convention not in AP_MR_CONVENTIONS:
        raise FairnessDomainError(f"unknown AP/MR convention {ap_mr_convention!r}")

    M = marg.n_groups
    a = np.full(M, np.nan)
    b = np.full((M, 2), np.nan)
    c = np.zeros((M, 2))
    warnings: list[str] = []

    if notion in ("DP", "AP"):
        included = marg.p_y_given_s_defined.copy()  # P(S=m) > 0
        for m0 in np.flatnonzero(~included):
            warnings.append(f"group {m0 + 1} excluded: P(S={m0 + 1}) = 0")
        a[included] = marg.p_s[included]
        if notion == "DP":
            b[included] = marg.p_y_given_s[included]
        else:
            b[included, 0] = marg.p_y_given_s[included, 0]
            b[included, 1] = -marg.p_y_given_s[included, 1]
            pos_rate = marg.p_y_given_s[:, 1]
            if measure == "MD":
                c[:, 0] = marg.p_pos
                c[included, 1] = -pos_rate[included]
            elif ap_mr_convention == "resolved":
                c[:, 0] = delta * marg.p_pos
                c[included, 1] = -pos_rate[included]
            else:
                c[:, 0] = -delta * marg.p_pos
                c[included, 1] = pos_rate[included]
        c[~included] = np.nan
    else:
        z = 1 if notion == "EO" else 0
        if not marg.p_s_given_y_defined[z]:
            raise UndefinedMarginalError(f"P(S=m|Y={z})")
        included = marg.p_event[:, z] > 0.0
        for m0 in np.flatnonzero(~included):
            warnings.append(f"group {m0 + 1} excluded: P(Y={z}, S={m0 + 1}) = 0")
        a[included] = marg.p_s_given_y[included, z]
        b[included, 0] = 0.0 if notion == "EO" else 1.0
        b[included, 1] = 1.0 if notion == "EO" else 0.0
        c[~included] = np.nan

    return CoefficientTable(
        notion=notion,
        measure=measure,
        delta=float(delta),
        a=a,
        b=b,
        c=c,
        included=included,
        warnings=tuple(warnings),
        ap_mr_convention=ap_mr_convention,
    )
