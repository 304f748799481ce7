"""Domain types for group-fair binary classification on finite distributions.

Conventions used throughout the package:

- A problem instance couples features ``x``, a composite sensitive group
  ``s`` in ``{1, ..., M}``, and a binary label ``y`` in ``{0, 1}``.
- Composite groups come from one or more declared sensitive features via a
  mixed-radix encoding (first declared feature most significant), so group
  indices are stable across runs.
- Finite joint laws are stored densely as ``mass[i, m-1, y]`` over an
  explicit support of x-points.  Every marginal is recomputed from this one
  table; nothing is cached independently of it.
- Conditioning on a zero-mass event yields an explicit *undefined* marker:
  NaN in the raw arrays plus ``False`` in a companion mask.  Accessors raise
  :class:`UndefinedMarginalError` instead of silently returning 0, so that
  callers (the measures layer, coefficient construction) must decide how to
  treat such groups.
- All probabilities are 64-bit floats; "exact" always means exact summation
  over the finite support, up to stated tolerances.

All types are immutable after construction and safe to share across
concurrent readers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

MASS_TOL = 1e-12

NOTIONS = ("DP", "EO", "PE", "AP")
COMPOSITE_NOTIONS = ("EqualizedOdds",)
MEASURES = ("MD", "MR")
GROUP_MODES = ("intersectional", "independent")


class FairnessDomainError(ValueError):
    """An input violates a documented domain contract."""


class UndefinedMarginalError(FairnessDomainError):
    """A marginal was requested whose conditioning event has zero mass."""

    def __init__(self, name: str) -> None:
        super().__init__(f"marginal {name} is undefined: conditioning event has zero mass")
        self.marginal = name


# ---------------------------------------------------------------------------
# Sensitive features and composite group indexing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SensitiveSpec:
    """Declared sensitive features and how groups are formed from them.

    ``features`` is an ordered sequence of ``(name, cardinality)`` pairs with
    cardinality >= 2.  In ``intersectional`` mode the composite group count is
    the product of the cardinalities; in ``independent`` mode each feature is
    audited on its own group structure.
    """

    features: tuple[tuple[str, int], ...]
    mode: str = "intersectional"

    def __post_init__(self) -> None:
        feats = tuple((str(n), int(c)) for n, c in self.features)
        object.__setattr__(self, "features", feats)
        if not feats:
            raise FairnessDomainError("at least one sensitive feature is required")
        for name, card in feats:
            if card < 2:
                raise FairnessDomainError(f"sensitive feature {name!r} needs cardinality >= 2, got {card}")
        if self.mode not in GROUP_MODES:
            raise FairnessDomainError(f"unknown group mode {self.mode!r}")

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.features)

    @property
    def n_groups(self) -> int:
        """Composite group count M (product of cardinalities)."""
        out = 1
        for c in self.cardinalities:
            out *= c
        return out


def composite_index(values: Sequence[int], spec: SensitiveSpec) -> int:
    """Encode a sensitive tuple as a composite group index in ``1..M``.

    Mixed-radix with the first declared feature most significant, so e.g.
    cardinalities (2, 3) map (1,1)->1, (1,2)->2, ..., (2,3)->6.  Feature
    values are 1-based.
    """
    cards = spec.cardinalities
    if len(values) != len(cards):
        raise FairnessDomainError(f"expected {len(cards)} sensitive values, got {len(values)}")
    idx = 0
    for v, card in zip(values, cards):
        v = int(v)
        if not 1 <= v <= card:
            raise FairnessDomainError(f"sensitive value {v} outside 1..{card}")
        idx = idx * card + (v - 1)
    return idx + 1


def composite_values(index: int, spec: SensitiveSpec) -> tuple[int, ...]:
    """Inverse of :func:`composite_index`: decode a group index to its tuple."""
    cards = spec.cardinalities
    if not 1 <= index <= spec.n_groups:
        raise FairnessDomainError(f"group index {index} outside 1..{spec.n_groups}")
    rem = index - 1
    out = []
    for card in reversed(cards):
        out.append(rem % card + 1)
        rem //= card
    return tuple(reversed(out))


def composite_index_array(values: np.ndarray, spec: SensitiveSpec) -> np.ndarray:
    """Vectorized :func:`composite_index` over rows of a ``(n, K)`` array."""
    values = np.asarray(values, dtype=int)
    if values.ndim == 1:
        values = values[:, None]
    cards = spec.cardinalities
    if values.shape[1] != len(cards):
        raise FairnessDomainError(f"expected {len(cards)} sensitive columns, got {values.shape[1]}")
    idx = np.zeros(values.shape[0], dtype=int)
    for k, card in enumerate(cards):
        col = values[:, k]
        if col.min(initial=1) < 1 or col.max(initial=card) > card:
            bad = int(col[(col < 1) | (col > card)][0])
            raise FairnessDomainError(f"sensitive value {bad} outside 1..{card} in feature {spec.features[k][0]!r}")
        idx = idx * card + (col - 1)
    return idx + 1


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """Finite sample of (features, sensitive tuple, binary label) rows.

    ``features`` is ``(n, d)`` float, ``sensitive`` is ``(n, K)`` of 1-based
    feature values, ``labels`` is ``(n,)`` in {0, 1}.
    """

    features: np.ndarray
    sensitive: np.ndarray
    labels: np.ndarray
    spec: SensitiveSpec

    def __post_init__(self) -> None:
        x = np.asarray(self.features, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        s = np.asarray(self.sensitive, dtype=int)
        if s.ndim == 1:
            s = s[:, None]
        y = np.asarray(self.labels, dtype=int)
        if x.ndim != 2:
            raise FairnessDomainError("features must be a 2-d array")
        n = x.shape[0]
        if s.shape[0] != n or y.shape[0] != n:
            raise FairnessDomainError("features, sensitive and labels must have matching row counts")
        if n == 0:
            raise FairnessDomainError("dataset must be nonempty")
        if not np.isin(y, (0, 1)).all():
            raise FairnessDomainError("labels must be 0 or 1")
        groups = composite_index_array(s, self.spec)  # validates ranges
        for arr in (x, s, y, groups):
            arr.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "sensitive", s)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "_groups", groups)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def groups(self) -> np.ndarray:
        """Composite group index (1-based) per row."""
        return self._groups  # type: ignore[attr-defined]


# ---------------------------------------------------------------------------
# Discrete joint distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteJointDistribution:
    """Exact finite-support joint law over (x, s, y).

    ``support`` holds the x-points (opaque labels or feature rows);
    ``mass[i, m-1, y]`` is P(X = support[i], S = m, Y = y).  Masses must be
    nonnegative and sum to 1 within ``MASS_TOL``.
    """

    support: tuple
    mass: np.ndarray

    def __post_init__(self) -> None:
        mass = np.asarray(self.mass, dtype=float)
        if mass.ndim != 3 or mass.shape[2] != 2:
            raise FairnessDomainError("mass must have shape (n_support, M, 2)")
        if mass.shape[0] != len(self.support):
            raise FairnessDomainError("mass and support lengths differ")
        if mass.shape[1] < 1:
            raise FairnessDomainError("at least one group is required")
        if (mass < 0).any():
            raise FairnessDomainError("masses must be nonnegative")
        total = float(mass.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise FairnessDomainError(f"masses must sum to 1 within {MASS_TOL}, got {total!r}")
        mass.setflags(write=False)
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "mass", mass)

    @property
    def n_support(self) -> int:
        return self.mass.shape[0]

    @property
    def n_groups(self) -> int:
        return self.mass.shape[1]

    def marginals(self) -> "MarginalSet":
        return marginals(self)


@dataclass(frozen=True)
class MarginalSet:
    """All marginals of one :class:`DiscreteJointDistribution`.

    Raw arrays carry NaN in undefined slots; the ``*_defined`` masks say
    which entries are meaningful.  The ``require_*`` accessors raise
    :class:`UndefinedMarginalError` with the marginal's name.

    Shapes: ``p_x (n,)``, ``p_s (M,)``, ``p_event (M, 2)`` for P(Y=y, S=m),
    ``p_y_given_s (M, 2)``, ``p_s_given_y (M, 2)``, ``eta (n,)``.
    """

    p_pos: float
    p_neg: float
    p_x: np.ndarray
    p_s: np.ndarray
    p_event: np.ndarray
    p_y_given_s: np.ndarray
    p_s_given_y: np.ndarray
    eta: np.ndarray
    eta_defined: np.ndarray
    p_y_given_s_defined: np.ndarray
    p_s_given_y_defined: np.ndarray

    @property
    def n_groups(self) -> int:
        return self.p_s.shape[0]

    def require_eta(self, i: int) -> float:
        if not self.eta_defined[i]:
            raise UndefinedMarginalError(f"P(Y=1|X=x{i})")
        return float(self.eta[i])

    def require_p_y_given_s(self, m: int, y: int) -> float:
        if not self.p_y_given_s_defined[m - 1]:
            raise UndefinedMarginalError(f"P(Y={y}|S={m})")
        return float(self.p_y_given_s[m - 1, y])

    def require_p_s_given_y(self, m: int, y: int) -> float:
        if not self.p_s_given_y_defined[y]:
            raise UndefinedMarginalError(f"P(S={m}|Y={y})")
        return float(self.p_s_given_y[m - 1, y])

    def require_p_event(self, m: int, y: int) -> float:
        return float(self.p_event[m - 1, y])


def marginals(dist: DiscreteJointDistribution) -> MarginalSet:
    """Derive every marginal of ``dist`` by direct summation of the joint."""
    mass = dist.mass
    p_x = mass.sum(axis=(1, 2))
    p_event = mass.sum(axis=0)  # (M, 2)
    p_s = p_event.sum(axis=1)
    p_y = p_event.sum(axis=0)  # (2,)
    p_pos = float(p_y[1])
    p_neg = float(p_y[0])

    s_defined = p_s > 0.0
    p_y_given_s = np.full((dist.n_groups, 2), np.nan)
    p_y_given_s[s_defined] = p_event[s_defined] / p_s[s_defined, None]

    y_defined = p_y > 0.0
    p_s_given_y = np.full((dist.n_groups, 2), np.nan)
    for y in (0, 1):
        if y_defined[y]:
            p_s_given_y[:, y] = p_event[:, y] / p_y[y]

    x_defined = p_x > 0.0
    eta = np.full(dist.n_support, np.nan)
    eta[x_defined] = mass[x_defined, :, 1].sum(axis=1) / p_x[x_defined]

    for arr in (p_x, p_s, p_event, p_y_given_s, p_s_given_y, eta, x_defined, s_defined, y_defined):
        arr.setflags(write=False)
    return MarginalSet(
        p_pos=p_pos,
        p_neg=p_neg,
        p_x=p_x,
        p_s=p_s,
        p_event=p_event,
        p_y_given_s=p_y_given_s,
        p_s_given_y=p_s_given_y,
        eta=eta,
        eta_defined=x_defined,
        p_y_given_s_defined=s_defined,
        p_s_given_y_defined=y_defined,
    )


def empirical_distribution(
    dataset: Dataset,
    discretize: Callable[[np.ndarray], object] | None = None,
) -> DiscreteJointDistribution:
    """Relative-frequency joint law of a dataset.

    Distinct feature rows become distinct support points unless an optional
    ``discretize`` callable maps each row to a bin key.  Support points carry
    the (first-seen) feature row so the result can feed feature-based models.
    """
    if dataset.n_rows == 0:
        raise FairnessDomainError("dataset must be nonempty")
    if discretize is None:
        keys = [tuple(row) for row in dataset.features]
    else:
        keys = [discretize(row) for row in dataset.features]
    index: dict[object, int] = {}
    support: list[object] = []
    rows = np.empty(dataset.n_rows, dtype=int)
    for i, key in enumerate(keys):
        at = index.get(key)
        if at is None:
            at = len(support)
            index[key] = at
            support.append(dataset.features[i])
        rows[i] = at
    M = dataset.spec.n_groups
    mass = np.zeros((len(support), M, 2))
    np.add.at(mass, (rows, dataset.groups - 1, dataset.labels), 1.0)
    mass /= dataset.n_rows
    return DiscreteJointDistribution(support=tuple(support), mass=mass)


def rowwise_distribution(dataset: Dataset) -> DiscreteJointDistribution:
    """Empirical law with one support point per row (no deduplication).

    Lets per-row acceptance probabilities act as a tabular classifier, so
    empirical measures reuse the exact-distribution formulas verbatim.
    """
    n = dataset.n_rows
    mass = np.zeros((n, dataset.spec.n_groups, 2))
    mass[np.arange(n), dataset.groups - 1, dataset.labels] = 1.0 / n
    return DiscreteJointDistribution(support=tuple(range(n)), mass=mass)


def project_feature(dist: DiscreteJointDistribution, spec: SensitiveSpec, k: int) -> DiscreteJointDistribution:
    """Collapse a composite-group law onto sensitive feature ``k`` (0-based).

    Used for independent group fairness, where each feature is audited over
    its own (overlapping) groups.
    """
    if dist.n_groups != spec.n_groups:
        raise FairnessDomainError("distribution group count does not match the sensitive spec")
    if not 0 <= k < spec.n_features:
        raise FairnessDomainError(f"feature index {k} outside 0..{spec.n_features - 1}")
    card = spec.cardinalities[k]
    values = np.array([composite_values(m, spec)[k] for m in range(1, spec.n_groups + 1)])
    mass = np.zeros((dist.n_support, card, 2))
    for m0 in range(spec.n_groups):
        mass[:, values[m0] - 1, :] += dist.mass[:, m0, :]
    return DiscreteJointDistribution(support=dist.support, mass=mass)


# ---------------------------------------------------------------------------
# Randomized classifiers in tabular form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomizedClassifier:
    """Acceptance probability per support point of a fixed distribution."""

    accept: np.ndarray

    def __post_init__(self) -> None:
        acc = np.asarray(self.accept, dtype=float)
        if acc.ndim != 1:
            raise FairnessDomainError("accept must be a 1-d array")
        if (acc < 0).any() or (acc > 1).any():
            raise FairnessDomainError("acceptance probabilities must lie in [0, 1]")
        acc.setflags(write=False)
        object.__setattr__(self, "accept", acc)

    def flipped(self) -> "RandomizedClassifier":
        return RandomizedClassifier(1.0 - self.accept)

    @staticmethod
    def constant(n: int, p: float) -> "RandomizedClassifier":
        return RandomizedClassifier(np.full(n, float(p)))


# ---------------------------------------------------------------------------
# Fairness requirements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FairnessSpec:
    """Which disparity to bound, how, and by how much.

    ``notion`` is one of DP/EO/PE/AP or the composite ``EqualizedOdds``
    (EO and PE enforced simultaneously).  ``measure`` selects the additive
    (MD) or multiplicative (MR) disparity; ``delta`` is the tolerance, an
    upper bound for MD and a lower bound for MR.
    """

    notion: str
    measure: str
    delta: float
    group_mode: str = "intersectional"

    def __post_init__(self) -> None:
        if self.notion not in NOTIONS + COMPOSITE_NOTIONS:
            raise FairnessDomainError(f"unknown fairness notion {self.notion!r}")
        if self.measure not in MEASURES:
            raise FairnessDomainError(f"unknown measure {self.measure!r}")
        if not 0.0 <= self.delta <= 1.0:
            raise FairnessDomainError(f"delta must lie in [0, 1], got {self.delta}")
        if self.group_mode not in GROUP_MODES:
            raise FairnessDomainError(f"unknown group mode {self.group_mode!r}")

    @property
    def component_notions(self) -> tuple[str, ...]:
        """The plain notions audited: (EO, PE) for EqualizedOdds, else itself."""
        if self.notion == "EqualizedOdds":
            return ("EO", "PE")
        return (self.notion,)
