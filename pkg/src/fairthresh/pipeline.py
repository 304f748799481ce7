"""Training pipelines: post-processing plug-in, in-processing, frontiers.

Post-processing fits probability models once (the class probability and the
joint (group, label) law), then plugs them into the threshold score for any
multiplier vector — evaluating a whole multiplier grid costs one model fit.
In-processing turns the same correction into per-example costs and retrains
a weighted classifier per multiplier: example i with label y_i gets weight
c_{y_i}(x_i); negative weights are handled by flipping the label and using
the magnitude, which changes the empirical objective only by an
f-independent constant.

A frontier evaluates every grid multiplier on the tune split (accuracy,
cost-sensitive risk, achieved symmetrized disparity, all recomputed from
predictions); selection picks the feasible point of minimal risk, breaking
ties toward the smallest L1 multiplier norm.

Attribute handling: in ``blind`` mode classifiers see features only and the
correction uses fitted membership ratios; in ``aware`` mode the class
probability is fitted on features plus group indicators and only the
observed group's correction term applies.  Aware classifiers take
``(features, groups)`` pairs as input.

Seeds: one master seed derives all component seeds through
``numpy.random.SeedSequence(master).spawn`` in the fixed role order
(split, estimation, ties, grid), so runs are reproducible end to end.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .bayes import (
    ThresholdClassifier,
    aware_correction_columns,
    correction_columns,
    equalized_odds_columns,
)
from .coefficients import CoefficientTable, coefficients
from .core import Dataset, FairnessDomainError, FairnessSpec, RandomizedClassifier, rowwise_distribution
from .estimation import FitConfig, FittedGammaOracle, LinearProbabilityModel, fit_binary, fit_joint
from .measures import FairnessReport, symmetrized

SEED_ROLES = ("split", "estimation", "ties", "grid")

RECORD_VERSION = 1


def derive_seeds(master_seed: int) -> dict[str, int]:
    """Component seeds from one master seed, in the fixed role order."""
    children = np.random.SeedSequence(master_seed).spawn(len(SEED_ROLES))
    return {role: int(child.generate_state(1)[0]) for role, child in zip(SEED_ROLES, children)}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Multiplier grid: dense Cartesian for few groups, Latin hypercube above."""

    points_per_axis: int = 21
    bound: float = 1.0
    dense_max_groups: int = 3
    lhs_points: int = 2000
    eodds_points_per_axis: int = 11


@dataclass(frozen=True)
class PipelineConfig:
    notion: str = "DP"
    measure: str = "MD"
    delta: float = 0.05
    cost: float = 0.5
    attribute_mode: str = "blind"  # or "aware"
    alpha: float = 0.0
    grid: GridSpec = field(default_factory=GridSpec)
    estimation: FitConfig = field(default_factory=FitConfig)
    joint_strategy: str = "factored"
    warm_start_inprocess: bool = True
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.attribute_mode not in ("blind", "aware"):
            raise FairnessDomainError(f"unknown attribute mode {self.attribute_mode!r}")
        if not 0.0 <= self.cost <= 1.0 or not 0.0 <= self.delta <= 1.0:
            raise FairnessDomainError("cost and delta must lie in [0, 1]")

    @property
    def fairness(self) -> FairnessSpec:
        return FairnessSpec(notion=self.notion, measure=self.measure, delta=self.delta)


# ---------------------------------------------------------------------------
# Dataset utilities
# ---------------------------------------------------------------------------


def split_dataset(dataset: Dataset, seed: int, fractions: tuple[float, float] = (0.25, 0.25)) -> tuple[Dataset, Dataset, Dataset]:
    """(train, tune, test) split by random permutation.

    Defaults follow the half-for-testing protocol: 50% test, and the other
    half split evenly into train and tune.
    """
    n = dataset.n_rows
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_train = int(round(fractions[0] * n))
    n_tune = int(round(fractions[1] * n))
    parts = (order[:n_train], order[n_train : n_train + n_tune], order[n_train + n_tune :])
    out = []
    for idx in parts:
        out.append(
            Dataset(
                features=dataset.features[idx],
                sensitive=dataset.sensitive[idx],
                labels=dataset.labels[idx],
                spec=dataset.spec,
            )
        )
    return tuple(out)  # type: ignore[return-value]


def group_indicators(groups: np.ndarray, n_groups: int) -> np.ndarray:
    out = np.zeros((len(groups), n_groups))
    out[np.arange(len(groups)), np.asarray(groups, dtype=int) - 1] = 1.0
    return out


def _aware_design(features: np.ndarray, groups: np.ndarray, n_groups: int) -> np.ndarray:
    return np.concatenate([features, group_indicators(groups, n_groups)], axis=1)


# ---------------------------------------------------------------------------
# Fitted components (shared across a whole multiplier grid)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FittedComponents:
    """Everything postprocess/inprocess needs besides the multipliers.

    ``tables`` holds one coefficient table per component notion (one for
    plain notions, EO and PE for the composite).  ``eta_fn`` maps features
    to class probabilities; ``ratios_fn`` maps features to fitted membership
    ratios (blind mode).  ``eta_aware_fn`` maps (features, groups) to class
    probabilities (aware mode).  ``records`` are serializable model records.
    """

    config: PipelineConfig
    n_groups: int
    tables: tuple[CoefficientTable, ...]
    p_event: np.ndarray
    eta_fn: object = None
    ratios_fn: object = None
    eta_aware_fn: object = None
    records: dict = field(default_factory=dict)

    @property
    def table(self) -> CoefficientTable:
        return self.tables[0]

    def columns(self, features: np.ndarray, groups: np.ndarray | None = None) -> np.ndarray:
        """Correction columns B with score = eta - cost - B @ lam."""
        cfg = self.config
        if cfg.attribute_mode == "aware":
            if groups is None:
                raise FairnessDomainError("aware mode needs group labels")
            eta = self.eta_aware_fn(features, groups)
            p_y = np.stack([1.0 - eta, eta], axis=1)
            return aware_correction_columns(p_y, groups, self.p_event, self.table)
        ratios = self.ratios_fn(features)
        if cfg.notion == "EqualizedOdds":
            return equalized_odds_columns(ratios, self.tables[0], self.tables[1])
        return correction_columns(ratios, self.table)

    def eta(self, features: np.ndarray, groups: np.ndarray | None = None) -> np.ndarray:
        if self.config.attribute_mode == "aware":
            if groups is None:
                raise FairnessDomainError("aware mode needs group labels")
            return self.eta_aware_fn(features, groups)
        return self.eta_fn(features)


def fit_components(train: Dataset, config: PipelineConfig) -> FittedComponents:
    """Fit the probability models and empirical coefficient tables once."""
    marg = rowwise_distribution(train).marginals()
    notions = FairnessSpec(notion=config.notion, measure=config.measure, delta=config.delta).component_notions
    measure = config.measure
    if config.notion == "EqualizedOdds":
        if measure != "MD":
            raise FairnessDomainError("the composite equalized-odds pipeline uses the additive measure")
        if config.attribute_mode != "blind":
            raise FairnessDomainError("the composite equalized-odds pipeline is attribute-blind")
    tables = tuple(coefficients(nt, measure, config.delta, marg) for nt in notions)
    seeds = derive_seeds(config.master_seed)
    est = replace(config.estimation, seed=seeds["estimation"])
    M = train.spec.n_groups
    records: dict = {}
    eta_fn = ratios_fn = eta_aware_fn = None
    if config.attribute_mode == "aware":
        design = _aware_design(train.features, train.groups, M)
        model = fit_binary(design, train.labels, est)
        records["eta_aware_model"] = model.to_record()

        def eta_aware_fn(features, groups, _model=model, _m=M):
            return _model.predict_positive(_aware_design(np.asarray(features, dtype=float), groups, _m))

    else:
        eta_model = fit_binary(train.features, train.labels, est)
        gamma = fit_joint(train.features, train.groups, train.labels, M, est, strategy=config.joint_strategy)
        records["eta_model"] = eta_model.to_record()
        records["gamma"] = gamma.to_record()
        eta_fn = eta_model.predict_positive
        ratios_fn = gamma.ratios
    return FittedComponents(
        config=config,
        n_groups=M,
        tables=tables,
        p_event=marg.p_event,
        eta_fn=eta_fn,
        ratios_fn=ratios_fn,
        eta_aware_fn=eta_aware_fn,
        records=records,
    )


# ---------------------------------------------------------------------------
# Post-processing (plug-in) and in-processing training
# ---------------------------------------------------------------------------


def _provenance(config: PipelineConfig, lam: np.ndarray, kind: str, components: FittedComponents) -> dict:
    return {
        "version": RECORD_VERSION,
        "kind": kind,
        "notion": config.notion,
        "measure": config.measure,
        "delta": config.delta,
        "cost": config.cost,
        "alpha": config.alpha,
        "attribute_mode": config.attribute_mode,
        "lam": np.asarray(lam, dtype=float).tolist(),
        "n_groups": components.n_groups,
        "tables": [_table_record(t) for t in components.tables],
        "p_event": components.p_event.tolist(),
        "models": dict(components.records),
    }


def _table_record(table: CoefficientTable) -> dict:
    return {
        "notion": table.notion,
        "measure": table.measure,
        "delta": table.delta,
        "a": np.nan_to_num(table.a).tolist(),
        "b": np.nan_to_num(table.b).tolist(),
        "c": np.nan_to_num(table.c).tolist(),
        "included": table.included.tolist(),
        "ap_mr_convention": table.ap_mr_convention,
    }


def _table_from_record(rec: dict) -> CoefficientTable:
    included = np.array(rec["included"], dtype=bool)
    return CoefficientTable(
        notion=rec["notion"],
        measure=rec["measure"],
        delta=float(rec["delta"]),
        a=np.array(rec["a"], dtype=float),
        b=np.array(rec["b"], dtype=float),
        c=np.array(rec["c"], dtype=float),
        included=included,
        warnings=(),
        ap_mr_convention=rec.get("ap_mr_convention", "resolved"),
    )


def expected_lambda_length(config: PipelineConfig, n_groups: int) -> int:
    return 2 * n_groups if config.notion == "EqualizedOdds" else n_groups


def postprocess(
    train: Dataset, lam: np.ndarray, config: PipelineConfig, components: FittedComponents | None = None
) -> ThresholdClassifier:
    """Plug fitted probabilities into the threshold score at multipliers lam.

    For the composite notion ``lam`` stacks the EO block then the PE block.
    """
    if components is None:
        components = fit_components(train, config)
    lam = np.asarray(lam, dtype=float)
    want = expected_lambda_length(config, components.n_groups)
    if lam.shape != (want,):
        raise FairnessDomainError(f"lam must have length {want}, got shape {lam.shape}")

    if config.attribute_mode == "aware":

        def score_fn(x, _c=components, _lam=lam, _cost=config.cost):
            features, groups = x
            features = np.asarray(features, dtype=float)
            return _c.eta(features, groups) - _cost - _c.columns(features, groups) @ _lam

    else:

        def score_fn(x, _c=components, _lam=lam, _cost=config.cost):
            features = np.asarray(x, dtype=float)
            return _c.eta(features) - _cost - _c.columns(features) @ _lam

    return ThresholdClassifier(
        score_fn=score_fn, alpha=config.alpha, provenance=_provenance(config, lam, "postprocess", components)
    )


def inprocess(
    train: Dataset, lam: np.ndarray, config: PipelineConfig, components: FittedComponents | None = None
) -> ThresholdClassifier:
    """Cost-sensitive retraining with correction-derived example weights.

    Weight of example i is c_{y_i}(x_i) where c_0 = cost + correction and
    c_1 = 1 - c_0; negative weights flip the label and keep the magnitude.
    The trained probability model thresholded at 1/2 is the classifier.
    """
    if components is None:
        components = fit_components(train, config)
    lam = np.asarray(lam, dtype=float)
    want = expected_lambda_length(config, components.n_groups)
    if lam.shape != (want,):
        raise FairnessDomainError(f"lam must have length {want}, got shape {lam.shape}")
    groups = train.groups if config.attribute_mode == "aware" else None
    c0 = config.cost + components.columns(train.features, groups) @ lam
    w = np.where(train.labels == 0, c0, 1.0 - c0)
    flip = w < 0.0
    labels = np.where(flip, 1 - train.labels, train.labels)
    sample_weight = np.abs(w)
    if not (sample_weight > 0).any():
        raise FairnessDomainError("all in-processing example weights are zero")
    seeds = derive_seeds(config.master_seed)
    est = replace(config.estimation, seed=seeds["estimation"])
    if config.attribute_mode == "aware":
        design = _aware_design(train.features, train.groups, components.n_groups)
        model = fit_binary(design, labels, est, sample_weight=sample_weight)

        def score_fn(x, _model=model, _m=components.n_groups):
            features, grp = x
            return _model.predict_positive(_aware_design(np.asarray(features, dtype=float), grp, _m)) - 0.5

    else:
        model = fit_binary(train.features, labels, est, sample_weight=sample_weight)

        def score_fn(x, _model=model):
            return _model.predict_positive(np.asarray(x, dtype=float)) - 0.5

    prov = _provenance(config, lam, "inprocess", components)
    prov["models"] = {"decision_model": model.to_record()}
    return ThresholdClassifier(score_fn=score_fn, alpha=config.alpha, provenance=prov)


def predict_dataset(
    clf: ThresholdClassifier, dataset: Dataset, attribute_mode: str, rng: np.random.Generator | None = None
) -> np.ndarray:
    x = (dataset.features, dataset.groups) if attribute_mode == "aware" else dataset.features
    return clf.classify(x, rng=rng)


# ---------------------------------------------------------------------------
# Classifier records (serialize / reload)
# ---------------------------------------------------------------------------


def classifier_to_record(clf: ThresholdClassifier) -> dict:
    """The documented serialized form of a pipeline-built classifier."""
    if not clf.provenance:
        raise FairnessDomainError("only pipeline-built classifiers carry a serializable record")
    return dict(clf.provenance)


def classifier_from_record(rec: dict) -> ThresholdClassifier:
    """Rebuild a classifier from :func:`classifier_to_record` output."""
    if rec.get("version") != RECORD_VERSION:
        raise FairnessDomainError(f"unsupported classifier record version {rec.get('version')!r}")
    lam = np.array(rec["lam"], dtype=float)
    cost = float(rec["cost"])
    mode = rec["attribute_mode"]
    n_groups = int(rec["n_groups"])
    models = rec["models"]
    if rec["kind"] == "inprocess":
        model = LinearProbabilityModel.from_record(models["decision_model"])
        if mode == "aware":

            def score_fn(x, _model=model, _m=n_groups):
                features, groups = x
                return _model.predict_positive(_aware_design(np.asarray(features, dtype=float), groups, _m)) - 0.5

        else:

            def score_fn(x, _model=model):
                return _model.predict_positive(np.asarray(x, dtype=float)) - 0.5

        return ThresholdClassifier(score_fn=score_fn, alpha=float(rec["alpha"]), provenance=rec)

    tables = [_table_from_record(t) for t in rec["tables"]]
    p_event = np.array(rec["p_event"], dtype=float)
    if mode == "aware":
        model = LinearProbabilityModel.from_record(models["eta_aware_model"])

        def score_fn(x, _model=model, _m=n_groups, _t=tables[0], _pe=p_event, _lam=lam, _cost=cost):
            features, groups = x
            eta = _model.predict_positive(_aware_design(np.asarray(features, dtype=float), groups, _m))
            p_y = np.stack([1.0 - eta, eta], axis=1)
            return eta - _cost - aware_correction_columns(p_y, groups, _pe, _t) @ _lam

    else:
        eta_model = LinearProbabilityModel.from_record(models["eta_model"])
        gamma = FittedGammaOracle.from_record(models["gamma"])
        if rec["notion"] == "EqualizedOdds":

            def score_fn(x, _em=eta_model, _g=gamma, _t=tables, _lam=lam, _cost=cost):
                features = np.asarray(x, dtype=float)
                cols = equalized_odds_columns(_g.ratios(features), _t[0], _t[1])
                return _em.predict_positive(features) - _cost - cols @ _lam

        else:

            def score_fn(x, _em=eta_model, _g=gamma, _t=tables[0], _lam=lam, _cost=cost):
                features = np.asarray(x, dtype=float)
                return _em.predict_positive(features) - _cost - correction_columns(_g.ratios(features), _t) @ _lam

    return ThresholdClassifier(score_fn=score_fn, alpha=float(rec["alpha"]), provenance=rec)


# ---------------------------------------------------------------------------
# Multiplier grids, frontier, selection
# ---------------------------------------------------------------------------


def lambda_grid(n_groups: int, config: PipelineConfig) -> np.ndarray:
    """Multiplier candidates, shape (L, K): dense Cartesian or Latin hypercube.

    Plain notions use one axis per group (dense up to ``dense_max_groups``);
    the composite stacks EO and PE blocks at the coarser per-axis count.
    Latin hypercube draws are seeded from the master seed's ``grid`` role.
    """
    g = config.grid
    if config.notion == "EqualizedOdds":
        dims, points = 2 * n_groups, g.eodds_points_per_axis
    else:
        dims, points = n_groups, g.points_per_axis
    if dims <= (2 * g.dense_max_groups if config.notion == "EqualizedOdds" else g.dense_max_groups):
        axis = np.linspace(-g.bound, g.bound, points)
        mesh = np.meshgrid(*([axis] * dims), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    rng = np.random.default_rng(derive_seeds(config.master_seed)["grid"])
    n = g.lhs_points
    cells = (rng.permutation(n)[:, None] if dims == 1 else np.stack([rng.permutation(n) for _ in range(dims)], axis=1))
    u = (cells + rng.random((n, dims))) / n
    return (2.0 * u - 1.0) * g.bound


@dataclass(frozen=True)
class FrontierPoint:
    """One multiplier setting evaluated on one split."""

    lam: tuple[float, ...]
    lam_labels: tuple[str, ...]
    split: str
    accuracy: float
    cs_risk: float
    fairness_value: float
    satisfied: bool
    method: str

    def to_row(self) -> dict:
        row = dict(zip(self.lam_labels, self.lam))
        row.update(
            accuracy=self.accuracy,
            cs_risk=self.cs_risk,
            fairness_value=self.fairness_value,
            split=self.split,
        )
        return row


def lambda_labels(config: PipelineConfig, n_groups: int) -> tuple[str, ...]:
    if config.notion == "EqualizedOdds":
        return tuple(f"lambda_eo_{m}" for m in range(1, n_groups + 1)) + tuple(
            f"lambda_pe_{m}" for m in range(1, n_groups + 1)
        )
    return tuple(f"lambda_{m}" for m in range(1, n_groups + 1))


def evaluate_predictions(
    preds: np.ndarray, dataset: Dataset, config: PipelineConfig
) -> tuple[float, float, FairnessReport]:
    """(accuracy, cost-sensitive risk, symmetrized report), all empirical."""
    y = dataset.labels
    acc = float((preds == y).mean())
    risk = float((1.0 - config.cost) * ((preds == 0) & (y == 1)).mean() + config.cost * ((preds == 1) & (y == 0)).mean())
    dist = rowwise_distribution(dataset)
    report = symmetrized(RandomizedClassifier(preds.astype(float)), dist, config.fairness)
    return acc, risk, report


def _fairness_sort_key(measure: str):
    def key(p: FrontierPoint):
        primary = p.fairness_value if measure == "MD" else -p.fairness_value
        return (primary, p.cs_risk, p.lam)

    return key


def frontier(
    train: Dataset,
    tune: Dataset,
    config: PipelineConfig,
    method: str = "postprocess",
    test: Dataset | None = None,
    components: FittedComponents | None = None,
    candidates: np.ndarray | None = None,
) -> list[FrontierPoint]:
    """Evaluate a multiplier grid; fairest points first.

    Post-processing scores the whole grid from one model fit.  In-processing
    retrains per candidate; by default its candidates are warm-started from
    the post-processing frontier (grid points whose tune-split disparity
    already meets the tolerance, topped up with the fairest remainder).
    """
    if method not in ("postprocess", "inprocess"):
        raise FairnessDomainError(f"unknown frontier method {method!r}")
    if components is None:
        components = fit_components(train, config)
    labels = lambda_labels(config, components.n_groups)
    if candidates is None:
        candidates = lambda_grid(components.n_groups, config)
        if method == "inprocess" and config.warm_start_inprocess:
            post = frontier(train, tune, config, "postprocess", components=components, candidates=candidates)
            tune_pts = [p for p in post if p.split == "tune"]
            good = [p for p in tune_pts if p.satisfied]
            short = good if good else tune_pts[: max(10, len(labels))]
            keep = {p.lam for p in short} | {tuple(0.0 for _ in labels)}
            candidates = np.array(sorted(keep))
    splits = [("tune", tune)] + ([("test", test)] if test is not None else [])
    points: list[FrontierPoint] = []
    tie_rng = np.random.default_rng(derive_seeds(config.master_seed)["ties"])
    for lam in np.asarray(candidates, dtype=float):
        builder = postprocess if method == "postprocess" else inprocess
        clf = builder(train, lam, config, components=components)
        for split_name, data in splits:
            preds = predict_dataset(clf, data, config.attribute_mode, rng=tie_rng)
            acc, risk, report = evaluate_predictions(preds, data, config)
            points.append(
                FrontierPoint(
                    lam=tuple(float(v) for v in lam),
                    lam_labels=labels,
                    split=split_name,
                    accuracy=acc,
                    cs_risk=risk,
                    fairness_value=report.value,
                    satisfied=bool(report.satisfied),
                    method=method,
                )
            )
    points.sort(key=_fairness_sort_key(config.measure))
    return points


class NoFeasibleLambda(FairnessDomainError):
    """No grid point met the tolerance on the tune split."""

    def __init__(self, closest: FrontierPoint, delta: float) -> None:
        super().__init__(
            f"no multiplier met the tolerance {delta}; closest achieved "
            f"fairness {closest.fairness_value:.4f} at lam={closest.lam}"
        )
        self.closest = closest


def select_lambda(points: list[FrontierPoint], delta: float, measure: str) -> FrontierPoint:
    """Feasible tune-split point with minimal risk; ties favor small ||lam||_1.

    Feasibility is strict (no slack): value <= delta for MD, >= delta for MR.
    """
    tune_pts = [p for p in points if p.split == "tune"]
    if not tune_pts:
        raise FairnessDomainError("frontier holds no tune-split points")
    if measure == "MD":
        feasible = [p for p in tune_pts if p.fairness_value <= delta]
        closest = min(tune_pts, key=lambda p: (p.fairness_value, p.cs_risk))
    else:
        feasible = [p for p in tune_pts if p.fairness_value >= delta]
        closest = min(tune_pts, key=lambda p: (-p.fairness_value, p.cs_risk))
    if not feasible:
        raise NoFeasibleLambda(closest, delta)
    return min(feasible, key=lambda p: (p.cs_risk, sum(abs(v) for v in p.lam), p.lam))


# ---------------------------------------------------------------------------
# Documented synthetic generator (used by the end-to-end acceptance check)
# ---------------------------------------------------------------------------


def synthetic_dataset(n_rows: int = 20_000, seed: int = 0) -> Dataset:
    """Two-group Gaussian mixture whose selection disparity is cheap to fix.

    Equal group priors; features are 2-d Gaussians, x1 centered at +2 for
    group 1 and -2 for group 2 (unit variance), x2 standard normal, and
    P(Y=1 | x) = sigmoid(0.5 x1 + 2 x2) with no direct group effect.  The
    unconstrained cost-1/2 classifier selects group 1 far more often
    (symmetrized additive DP disparity about 0.18, accuracy about 0.80), but
    x1 nearly reveals the group while carrying little of the label signal,
    so threshold corrections can remove the disparity for roughly three
    accuracy points (LP-verified on discretized draws).
    """
    from .core import SensitiveSpec

    rng = np.random.default_rng(seed)
    spec = SensitiveSpec(features=(("group", 2),), mode="intersectional")
    s = (rng.random(n_rows) < 0.5).astype(int) + 1
    x = rng.normal(size=(n_rows, 2))
    x[:, 0] += np.where(s == 1, 2.0, -2.0)
    logits = 0.5 * x[:, 0] + 2.0 * x[:, 1]
    y = (rng.random(n_rows) < 1.0 / (1.0 + np.exp(-logits))).astype(int)
    return Dataset(features=x, sensitive=s[:, None], labels=y, spec=spec)
