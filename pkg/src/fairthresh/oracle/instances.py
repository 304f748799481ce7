"""Seeded random instances for the verification oracle.

Joint masses are Dirichlet-distributed over all (x, s, y) cells and then
mixed toward uniform so every cell keeps at least ``floor`` mass; this keeps
every membership ratio and conditional marginal well-defined.  All draws
come from one ``numpy.random.Generator`` consumed in a fixed order, so a
seed pins an entire instance stream.
"""

from __future__ import annotations

import numpy as np

from ..core import DiscreteJointDistribution, RandomizedClassifier

DEFAULT_FLOOR = 0.01


def random_distribution(
    rng: np.random.Generator, n_support: int, n_groups: int, floor: float = DEFAULT_FLOOR
) -> DiscreteJointDistribution:
    cells = n_support * n_groups * 2
    if cells * floor >= 1.0:
        raise ValueError(f"floor {floor} too large for {cells} cells")
    raw = rng.dirichlet(np.ones(cells))
    mass = floor + (1.0 - cells * floor) * raw
    return DiscreteJointDistribution(
        support=tuple(f"x{i}" for i in range(n_support)),
        mass=mass.reshape(n_support, n_groups, 2),
    )


def random_classifier(rng: np.random.Generator, n_support: int) -> RandomizedClassifier:
    return RandomizedClassifier(rng.random(n_support))


def random_multipliers(rng: np.random.Generator, n_groups: int, bound: float = 1.0) -> np.ndarray:
    return rng.uniform(-bound, bound, size=n_groups)
