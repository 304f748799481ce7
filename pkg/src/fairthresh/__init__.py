"""Risk-optimal fair binary classification with threshold corrections.

Layers, bottom up:

- :mod:`fairthresh.core` — groups, datasets, finite joint laws, marginals.
- :mod:`fairthresh.coefficients` — linear-form coefficient tables per notion.
- :mod:`fairthresh.bayes` — threshold scores, instance costs, classifiers.
- :mod:`fairthresh.measures` — exact/empirical disparities and risks.
- :mod:`fairthresh.oracle` — LP + brute-force verification on small instances.
- :mod:`fairthresh.estimation` — from-scratch probability estimators.
- :mod:`fairthresh.pipeline` — post-/in-processing training and frontiers.
- :mod:`fairthresh.cli` — the ``fairthresh`` command.
"""

from .core import (
    Dataset,
    DiscreteJointDistribution,
    FairnessDomainError,
    FairnessSpec,
    MarginalSet,
    RandomizedClassifier,
    SensitiveSpec,
    UndefinedMarginalError,
    composite_index,
    composite_values,
    empirical_distribution,
    marginals,
    project_feature,
)
from .coefficients import CoefficientTable, coefficients
from .bayes import (
    ExactMembershipOracle,
    ThresholdClassifier,
    apply_threshold,
    instance_costs,
    scores_aware,
    scores_equalized_odds,
    scores_independent,
    scores_md,
    scores_mr,
)
from .measures import (
    FairnessReport,
    GroupRateTable,
    accuracy,
    cs_risk,
    empirical_report,
    fair_cs_risk,
    group_rates,
    md_group,
    mr_group,
    r_md,
    r_mr,
    symmetrized,
)

__version__ = "0.1.0"

__all__ = [
    "CoefficientTable",
    "Dataset",
    "DiscreteJointDistribution",
    "ExactMembershipOracle",
    "FairnessDomainError",
    "FairnessReport",
    "FairnessSpec",
    "GroupRateTable",
    "MarginalSet",
    "RandomizedClassifier",
    "SensitiveSpec",
    "ThresholdClassifier",
    "UndefinedMarginalError",
    "accuracy",
    "apply_threshold",
    "coefficients",
    "composite_index",
    "composite_values",
    "cs_risk",
    "empirical_distribution",
    "empirical_report",
    "fair_cs_risk",
    "group_rates",
    "instance_costs",
    "marginals",
    "md_group",
    "mr_group",
    "project_feature",
    "r_md",
    "r_mr",
    "scores_aware",
    "scores_equalized_odds",
    "scores_independent",
    "scores_md",
    "scores_mr",
    "symmetrized",
]
