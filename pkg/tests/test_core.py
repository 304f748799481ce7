import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairthresh.core import (
    Dataset,
    DiscreteJointDistribution,
    FairnessDomainError,
    FairnessSpec,
    RandomizedClassifier,
    SensitiveSpec,
    UndefinedMarginalError,
    composite_index,
    composite_index_array,
    composite_values,
    empirical_distribution,
    marginals,
    project_feature,
)


def spec_of(*cards, mode="intersectional"):
    return SensitiveSpec(features=tuple((f"a{k}", c) for k, c in enumerate(cards)), mode=mode)


class TestCompositeIndex:
    def test_single_feature_identity(self):
        assert composite_index((1,), spec_of(2)) == 1
        assert composite_index((2,), spec_of(2)) == 2

    def test_mixed_radix_two_binary(self):
        assert composite_index((2, 1), spec_of(2, 2)) == 3

    def test_last_tuple_maps_to_group_count(self):
        assert composite_index((2, 3), spec_of(2, 3)) == 6

    def test_out_of_range_entry(self):
        with pytest.raises(FairnessDomainError):
            composite_index((3, 1), spec_of(2, 2))
        with pytest.raises(FairnessDomainError):
            composite_index((0,), spec_of(2))

    def test_wrong_arity(self):
        with pytest.raises(FairnessDomainError):
            composite_index((1,), spec_of(2, 2))

    @given(st.lists(st.integers(min_value=2, max_value=4), min_size=1, max_size=3))
    @settings(max_examples=50)
    def test_bijection(self, cards):
        spec = spec_of(*cards)
        seen = set()
        for m in range(1, spec.n_groups + 1):
            tup = composite_values(m, spec)
            assert composite_index(tup, spec) == m
            seen.add(tup)
        assert len(seen) == spec.n_groups

    def test_array_form_matches_scalar(self):
        spec = spec_of(2, 3)
        tuples = [(s1, s2) for s1 in (1, 2) for s2 in (1, 2, 3)]
        arr = composite_index_array(np.array(tuples), spec)
        assert arr.tolist() == [composite_index(t, spec) for t in tuples]


class TestSensitiveSpec:
    def test_cardinality_below_two_rejected(self):
        with pytest.raises(FairnessDomainError):
            spec_of(1)

    def test_group_count_is_product(self):
        assert spec_of(2, 3, 2).n_groups == 12

    def test_unknown_mode(self):
        with pytest.raises(FairnessDomainError):
            spec_of(2, mode="nested")


class TestDistributionValidation:
    def test_mass_must_sum_to_one(self):
        mass = np.full((1, 2, 2), 0.3)
        with pytest.raises(FairnessDomainError):
            DiscreteJointDistribution(support=("x",), mass=mass)

    def test_negative_mass_rejected(self):
        mass = np.array([[[0.5, 0.6], [-0.1, 0.0]]])
        with pytest.raises(FairnessDomainError):
            DiscreteJointDistribution(support=("x",), mass=mass)

    def test_immutable_after_construction(self, d1):
        with pytest.raises(ValueError):
            d1.mass[0, 0, 0] = 0.5


class TestMarginals:
    def test_uniform_two_by_two_by_two(self):
        mass = np.full((2, 2, 2), 0.125)
        m = marginals(DiscreteJointDistribution(support=("x0", "x1"), mass=mass))
        assert m.p_pos == pytest.approx(0.5, abs=1e-15)
        assert m.p_s[0] == pytest.approx(0.5, abs=1e-15)
        assert np.allclose(m.eta, 0.5, atol=1e-15)

    def test_d1_values(self, d1):
        # frozen from direct summation of the D1 cells
        m = marginals(d1)
        assert m.p_pos == pytest.approx(0.5, abs=1e-12)
        assert m.eta[0] == pytest.approx(0.30, abs=1e-12)
        assert m.eta[1] == pytest.approx(0.70, abs=1e-12)
        assert np.allclose(m.p_s, [0.5, 0.5], atol=1e-12)
        assert m.require_p_y_given_s(1, 1) == pytest.approx(0.6, abs=1e-12)
        assert np.allclose(m.p_event, [[0.2, 0.3], [0.3, 0.2]], atol=1e-12)

    def test_zero_mass_event_flagged_undefined(self):
        # no (y=1, s=2) mass anywhere
        mass = np.array(
            [
                [[0.3, 0.3], [0.2, 0.0]],
                [[0.1, 0.05], [0.05, 0.0]],
            ]
        )
        m = marginals(DiscreteJointDistribution(support=("x0", "x1"), mass=mass))
        assert m.require_p_s_given_y(2, 1) == pytest.approx(0.0)
        assert m.p_event[1, 1] == 0.0
        # a zero-mass *conditioning* marginal raises by name
        empty_group = np.array([[[0.6, 0.4], [0.0, 0.0]]])
        m2 = marginals(DiscreteJointDistribution(support=("x0",), mass=empty_group))
        with pytest.raises(UndefinedMarginalError, match="S=2"):
            m2.require_p_y_given_s(2, 1)

    def test_event_probabilities_partition(self, d1):
        m = marginals(d1)
        assert m.p_event.sum() == pytest.approx(1.0, abs=1e-12)

    def test_group_conditionals_normalize(self, d1):
        m = marginals(d1)
        for y in (0, 1):
            assert m.p_s_given_y[:, y].sum() == pytest.approx(1.0, abs=1e-12)


class TestEmpiricalDistribution:
    def _dataset(self, rows):
        x = np.array([r[0] for r in rows], dtype=float)
        s = np.array([[r[1]] for r in rows])
        y = np.array([r[2] for r in rows])
        return Dataset(features=x, sensitive=s, labels=y, spec=spec_of(2))

    def test_identical_rows_collapse(self):
        ds = self._dataset([((1.0, 2.0), 1, 1)] * 4)
        dist = empirical_distribution(ds)
        assert dist.n_support == 1
        assert dist.mass.sum() == pytest.approx(1.0)
        assert dist.mass[0, 0, 1] == pytest.approx(1.0)

    def test_distinct_rows_split_mass(self):
        ds = self._dataset([((0.0,), 1, 0), ((1.0,), 2, 1)])
        dist = empirical_distribution(ds)
        assert dist.n_support == 2
        assert np.isclose(dist.mass.sum(axis=(1, 2)), 0.5).all()

    def test_discretization_merges_points(self):
        ds = self._dataset([((0.1,), 1, 0), ((0.2,), 1, 0), ((0.9,), 2, 1)])
        dist = empirical_distribution(ds, discretize=lambda r: round(float(r[0])))
        assert dist.n_support == 2

    def test_monte_carlo_masses_converge(self, d1):
        # sample rows from D1 and check empirical masses approach the truth
        rng = np.random.default_rng(123)
        n = 100_000
        flat = d1.mass.reshape(-1)
        draws = rng.choice(flat.size, size=n, p=flat)
        i, rem = np.divmod(draws, 4)
        s, y = np.divmod(rem, 2)
        ds = Dataset(features=i.astype(float)[:, None], sensitive=(s + 1)[:, None], labels=y, spec=spec_of(2))
        emp = empirical_distribution(ds)
        # align support: points keyed by the single feature value
        order = np.argsort([p[0] for p in emp.support])
        err = np.abs(emp.mass[order] - d1.mass).max()
        assert err < 0.02

    def test_empirical_marginals_converge(self, d1):
        rng = np.random.default_rng(7)
        n = 100_000
        flat = d1.mass.reshape(-1)
        draws = rng.choice(flat.size, size=n, p=flat)
        i, rem = np.divmod(draws, 4)
        s, y = np.divmod(rem, 2)
        ds = Dataset(features=i.astype(float)[:, None], sensitive=(s + 1)[:, None], labels=y, spec=spec_of(2))
        m = marginals(empirical_distribution(ds))
        truth = marginals(d1)
        assert abs(m.p_pos - truth.p_pos) < 0.02
        assert np.abs(m.p_s - truth.p_s).max() < 0.02

    def test_empty_dataset_rejected(self):
        with pytest.raises(FairnessDomainError):
            Dataset(features=np.zeros((0, 1)), sensitive=np.zeros((0, 1), dtype=int), labels=np.zeros(0, dtype=int), spec=spec_of(2))


class TestProjectFeature:
    def test_projection_collapses_composite_groups(self):
        spec = spec_of(2, 2)
        rng = np.random.default_rng(5)
        mass = rng.dirichlet(np.ones(16)).reshape(2, 4, 2)
        dist = DiscreteJointDistribution(support=("x0", "x1"), mass=mass)
        sub = project_feature(dist, spec, 0)
        assert sub.n_groups == 2
        # group 1 of feature 0 = composite groups (1,1) and (1,2) -> indices 1, 2
        expected = mass[:, 0, :] + mass[:, 1, :]
        assert np.allclose(sub.mass[:, 0, :], expected, atol=1e-15)
        assert sub.mass.sum() == pytest.approx(1.0, abs=1e-12)


class TestRandomizedClassifier:
    def test_bounds_enforced(self):
        with pytest.raises(FairnessDomainError):
            RandomizedClassifier(np.array([0.5, 1.2]))

    def test_flip_is_involution(self):
        f = RandomizedClassifier(np.array([0.2, 0.9]))
        assert np.allclose(f.flipped().flipped().accept, f.accept)


class TestFairnessSpec:
    def test_delta_range(self):
        with pytest.raises(FairnessDomainError):
            FairnessSpec(notion="DP", measure="MD", delta=1.5)

    def test_component_notions(self):
        assert FairnessSpec(notion="EqualizedOdds", measure="MD", delta=0.1).component_notions == ("EO", "PE")
        assert FairnessSpec(notion="AP", measure="MR", delta=0.1).component_notions == ("AP",)
