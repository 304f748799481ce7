"""Finite-sample probability estimation for the training pipelines.

Plain multinomial logistic models fitted by full-batch gradient descent on
the L2-regularized log loss (intercept unpenalized).  Deliberately from
scratch: the training contracts here are load-bearing for the rest of the
package and are tested directly —

- the analytic gradient matches central finite differences,
- the loss is non-increasing across epochs (a step-halving guard retries a
  too-long step, so divergence is impossible),
- fitting is deterministic: identical data and config give bit-identical
  weights (zero initialization, fixed operation order),
- predicted probabilities are clipped to [clip, 1 - clip] and renormalized.

Feature standardization (per-column mean/variance of the training split) is
stored inside the model and applied on every predict.

The joint law of (group, label) given x can be estimated directly as one
softmax over all M*2 cells, or factored as a group softmax times per-group
binary models; the factored route is the default since per-group binary
fits stay well-conditioned when some cells are small.  Either way the
fitted membership ratios divide the predicted cell probability by the
empirical cell frequency of the training split.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import FairnessDomainError

JOINT_STRATEGIES = ("factored", "direct")


@dataclass(frozen=True)
class FitConfig:
    """Gradient-descent settings; defaults are adequate at desk scale."""

    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-4
    seed: int = 0
    clip: float = 1e-6

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.epochs < 1 or self.l2 < 0:
            raise FairnessDomainError("invalid fit configuration")
        if not 0 < self.clip < 0.5:
            raise FairnessDomainError("clip must lie in (0, 0.5)")


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @staticmethod
    def fit(x: np.ndarray, sample_weight: np.ndarray | None = None) -> "Standardizer":
        # weighted moments keep weighted fits identical to duplicated-row fits
        w = np.ones(x.shape[0]) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        total = w.sum()
        mean = (w[:, None] * x).sum(axis=0) / total
        var = (w[:, None] * (x - mean) ** 2).sum(axis=0) / total
        scale = np.sqrt(var)
        scale = np.where(scale > 0.0, scale, 1.0)
        return Standardizer(mean=mean, scale=scale)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.scale


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _clip_renormalize(probs: np.ndarray, clip: float) -> np.ndarray:
    clipped = np.clip(probs, clip, 1.0 - clip)
    return clipped / clipped.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class LinearProbabilityModel:
    """Softmax-linear class probabilities with built-in standardization.

    ``weights`` has shape (C, d + 1), last column the intercept.  ``classes``
    maps output columns to caller-facing labels.
    """

    weights: np.ndarray
    classes: tuple
    clip: float
    standardizer: Standardizer
    constant: bool = False  # degenerate single-class fit

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1] - 1

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Class-probability rows, clipped to [clip, 1-clip] and renormalized."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[1] != self.n_features:
            raise FairnessDomainError(f"expected {self.n_features} features, got {x.shape[1]}")
        z = self.standardizer.apply(x)
        logits = z @ self.weights[:, :-1].T + self.weights[:, -1]
        return _clip_renormalize(_softmax(logits), self.clip)

    def predict_positive(self, x: np.ndarray) -> np.ndarray:
        """P(class = 1) for binary models (classes (0, 1))."""
        if self.classes != (0, 1):
            raise FairnessDomainError("predict_positive needs a binary 0/1 model")
        return self.predict(x)[:, 1]

    def to_record(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "classes": list(self.classes),
            "clip": self.clip,
            "mean": self.standardizer.mean.tolist(),
            "scale": self.standardizer.scale.tolist(),
            "constant": self.constant,
        }

    @staticmethod
    def from_record(rec: dict) -> "LinearProbabilityModel":
        return LinearProbabilityModel(
            weights=np.array(rec["weights"], dtype=float),
            classes=tuple(rec["classes"]),
            clip=float(rec["clip"]),
            standardizer=Standardizer(
                mean=np.array(rec["mean"], dtype=float), scale=np.array(rec["scale"], dtype=float)
            ),
            constant=bool(rec.get("constant", False)),
        )


def loss_and_gradient(
    weights: np.ndarray,
    z: np.ndarray,
    onehot: np.ndarray,
    l2: float,
    sample_weight: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Weighted mean log loss + L2 (intercept excluded), with its gradient.

    ``z`` is the standardized design (n, d), ``onehot`` (n, C); weights sum
    is the normalizer, so constant reweighting leaves the fit unchanged.
    """
    n = z.shape[0]
    design = np.concatenate([z, np.ones((n, 1))], axis=1)
    logits = design @ weights.T
    lmax = logits.max(axis=1, keepdims=True)
    logsumexp = lmax[:, 0] + np.log(np.exp(logits - lmax).sum(axis=1))
    w_total = sample_weight.sum()
    loglik = ((logits * onehot).sum(axis=1) - logsumexp) * sample_weight
    penalty = 0.5 * l2 * float((weights[:, :-1] ** 2).sum())
    loss = -float(loglik.sum()) / w_total + penalty
    probs = _softmax(logits)
    grad = ((probs - onehot) * sample_weight[:, None]).T @ design / w_total
    grad[:, :-1] += l2 * weights[:, :-1]
    return loss, grad


def fit_multiclass(
    features: np.ndarray,
    labels: np.ndarray,
    classes: tuple,
    config: FitConfig,
    sample_weight: np.ndarray | None = None,
) -> LinearProbabilityModel:
    """Softmax fit over ``classes`` by monotone full-batch gradient descent."""
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(labels)
    n, d = x.shape
    if n < 2:
        raise FairnessDomainError("at least two rows are required to fit")
    if sample_weight is None:
        sample_weight = np.ones(n)
    else:
        sample_weight = np.asarray(sample_weight, dtype=float)
        if (sample_weight < 0).any():
            raise FairnessDomainError("sample weights must be nonnegative")
        if sample_weight.sum() <= 0:
            raise FairnessDomainError("sample weights sum to zero: nothing to fit")
    idx = {c: k for k, c in enumerate(classes)}
    codes = np.array([idx[c] for c in y.tolist()])
    present = np.unique(codes[sample_weight > 0])
    std = Standardizer.fit(x, sample_weight)
    if present.size < 2:
        # degenerate fit: constant model concentrated on the one observed class
        warnings.warn("single-class data: fitting a degenerate constant model", RuntimeWarning)
        weights = np.zeros((len(classes), d + 1))
        only = int(present[0]) if present.size else 0
        logit = np.log(1.0 - config.clip) - np.log(config.clip)
        weights[:, -1] = -logit
        weights[only, -1] = logit
        return LinearProbabilityModel(weights=weights, classes=tuple(classes), clip=config.clip, standardizer=std, constant=True)
    z = std.apply(x)
    onehot = np.zeros((n, len(classes)))
    onehot[np.arange(n), codes] = 1.0
    weights = np.zeros((len(classes), d + 1))
    loss, grad = loss_and_gradient(weights, z, onehot, config.l2, sample_weight)
    lr = config.learning_rate
    for _ in range(config.epochs):
        step_lr = lr
        while True:
            trial = weights - step_lr * grad
            trial_loss, trial_grad = loss_and_gradient(trial, z, onehot, config.l2, sample_weight)
            if trial_loss <= loss or step_lr < 1e-12:
                break
            step_lr *= 0.5  # divergence guard: halve until the step descends
        if trial_loss > loss:
            break  # no descent direction left at this precision
        weights, loss, grad = trial, trial_loss, trial_grad
    return LinearProbabilityModel(weights=weights, classes=tuple(classes), clip=config.clip, standardizer=std)


def fit_binary(
    features: np.ndarray,
    labels: np.ndarray,
    config: FitConfig = FitConfig(),
    sample_weight: np.ndarray | None = None,
) -> LinearProbabilityModel:
    """Binary class-probability model over labels {0, 1}."""
    y = np.asarray(labels, dtype=int)
    if not np.isin(y, (0, 1)).all():
        raise FairnessDomainError("binary labels must be 0 or 1")
    return fit_multiclass(features, y, (0, 1), config, sample_weight=sample_weight)


# ---------------------------------------------------------------------------
# Joint (group, label) estimation and fitted membership ratios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FittedGammaOracle:
    """Estimated membership ratios: predicted cell probability over its rate.

    ``cell_rate[m-1, y]`` is the empirical frequency of (S=m, Y=y) on the
    training split; groups with empty cells are dropped (``included`` False)
    with a warning at fit time.  ``ratios`` returns NaN columns for dropped
    cells, matching the exact oracle's convention.
    """

    strategy: str
    n_groups: int
    cell_rate: np.ndarray
    included: np.ndarray
    group_model: LinearProbabilityModel | None  # P(S=m | x), factored
    label_models: tuple  # per-group P(Y | x), factored
    joint_model: LinearProbabilityModel | None  # P((m, y) | x), direct
    clip: float

    def joint(self, x: np.ndarray) -> np.ndarray:
        """Predicted P(S=m, Y=y | x), shape (n, M, 2), clipped/renormalized."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        n = x.shape[0]
        M = self.n_groups
        if self.strategy == "direct":
            flat = self.joint_model.predict(x)  # columns ordered (m, y)
            out = flat.reshape(n, M, 2)
        else:
            p_s = self.group_model.predict(x)  # (n, M)
            out = np.empty((n, M, 2))
            for m0 in range(M):
                if self.label_models[m0] is None:
                    out[:, m0, :] = 0.0
                    continue
                p_y = self.label_models[m0].predict(x)  # (n, 2)
                out[:, m0, :] = p_s[:, [m0]] * p_y
            flat = _clip_renormalize(out.reshape(n, M * 2), self.clip)
            out = flat.reshape(n, M, 2)
        return out

    def ratios(self, x: np.ndarray) -> np.ndarray:
        """gamma-hat[m, y](x): predicted cell probability / empirical rate."""
        probs = self.joint(x)
        out = np.full_like(probs, np.nan)
        ok = self.cell_rate > 0.0
        out[:, ok] = probs[:, ok] / self.cell_rate[ok]
        return out

    def eta(self, x: np.ndarray) -> np.ndarray:
        """P(Y=1 | x) implied by the joint model (sum over groups)."""
        return self.joint(x)[:, :, 1].sum(axis=1)

    def to_record(self) -> dict:
        return {
            "strategy": self.strategy,
            "n_groups": self.n_groups,
            "cell_rate": self.cell_rate.tolist(),
            "included": self.included.tolist(),
            "group_model": None if self.group_model is None else self.group_model.to_record(),
            "label_models": [None if m is None else m.to_record() for m in self.label_models],
            "joint_model": None if self.joint_model is None else self.joint_model.to_record(),
            "clip": self.clip,
        }

    @staticmethod
    def from_record(rec: dict) -> "FittedGammaOracle":
        load = LinearProbabilityModel.from_record
        return FittedGammaOracle(
            strategy=rec["strategy"],
            n_groups=int(rec["n_groups"]),
            cell_rate=np.array(rec["cell_rate"], dtype=float),
            included=np.array(rec["included"], dtype=bool),
            group_model=None if rec["group_model"] is None else load(rec["group_model"]),
            label_models=tuple(None if m is None else load(m) for m in rec["label_models"]),
            joint_model=None if rec["joint_model"] is None else load(rec["joint_model"]),
            clip=float(rec["clip"]),
        )


def fit_joint(
    features: np.ndarray,
    groups: np.ndarray,
    labels: np.ndarray,
    n_groups: int,
    config: FitConfig = FitConfig(),
    strategy: str = "factored",
) -> FittedGammaOracle:
    """Estimate P(S, Y | x) and the membership ratios.

    ``groups`` holds 1-based composite group labels.  ``factored`` fits a
    group softmax plus per-group binary label models; ``direct`` fits one
    softmax over all (group, label) cells (every cell must be nonempty).
    """
    if strategy not in JOINT_STRATEGIES:
        raise FairnessDomainError(f"unknown joint strategy {strategy!r}")
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    g = np.asarray(groups, dtype=int)
    y = np.asarray(labels, dtype=int)
    M = n_groups
    counts = np.zeros((M, 2))
    np.add.at(counts, (g - 1, y), 1.0)
    cell_rate = counts / len(y)
    included = counts.sum(axis=1) > 0
    for m0 in np.flatnonzero(~included):
        warnings.warn(f"group {m0 + 1} has no training rows and is dropped", RuntimeWarning)

    group_model = None
    label_models: list[LinearProbabilityModel | None] = [None] * M
    joint_model = None
    if strategy == "direct":
        if (counts == 0).any():
            empty = [(int(m0) + 1, int(yy)) for m0, yy in zip(*np.nonzero(counts == 0))]
            raise FairnessDomainError(f"direct joint fit needs every (group, label) cell nonempty; empty: {empty}")
        flat_labels = (g - 1) * 2 + y
        joint_model = fit_multiclass(x, flat_labels, tuple(range(M * 2)), config)
    else:
        group_model = fit_multiclass(x, g - 1, tuple(range(M)), config)
        for m0 in range(M):
            rows = g - 1 == m0
            if not rows.any():
                continue
            label_models[m0] = fit_binary(x[rows], y[rows], config)
    return FittedGammaOracle(
        strategy=strategy,
        n_groups=M,
        cell_rate=cell_rate,
        included=included,
        group_model=group_model,
        label_models=tuple(label_models),
        joint_model=joint_model,
        clip=config.clip,
    )
