import numpy as np
import pytest

from fairthresh.coefficients import coefficients
from fairthresh.core import DiscreteJointDistribution, FairnessDomainError, UndefinedMarginalError, marginals
from fairthresh.oracle import random_distribution

NOTIONS = ("DP", "EO", "PE", "AP")


class TestTableValues:
    def test_eo_table(self, d1):
        t = coefficients("EO", "MD", 0.1, marginals(d1))
        assert np.allclose(t.b, [[0, 1], [0, 1]])
        assert np.allclose(t.c, 0.0)
        # a_m = P(S=m | Y=1) on D1: (0.3, 0.2) / 0.5
        assert np.allclose(t.a, [0.6, 0.4], atol=1e-12)

    def test_pe_table(self, d1):
        t = coefficients("PE", "MD", 0.1, marginals(d1))
        assert np.allclose(t.b, [[1, 0], [1, 0]])
        assert np.allclose(t.a, [0.4, 0.6], atol=1e-12)

    def test_dp_table_on_d1(self, d1):
        t = coefficients("DP", "MD", 0.1, marginals(d1))
        assert np.allclose(t.a, [0.5, 0.5], atol=1e-12)
        # b[m, y] = P(Y=y | S=m); P(Y=1|S=1) = 0.6
        assert t.b[0, 1] == pytest.approx(0.6, abs=1e-12)
        assert t.b[1, 1] == pytest.approx(0.4, abs=1e-12)
        assert np.allclose(t.c, 0.0)

    def test_ap_md_constant_balanced_case(self):
        # p+ = 0.5 and P(Y=1|S=m) = 0.5 for both groups
        mass = np.full((2, 2, 2), 0.125)
        t = coefficients("AP", "MD", 0.3, marginals(DiscreteJointDistribution(support=("a", "b"), mass=mass)))
        assert np.allclose(t.c[:, 0], 0.5, atol=1e-12)
        assert np.allclose(t.c[:, 1], -0.5, atol=1e-12)

    def test_ap_b_has_sign_flip(self, d1):
        t = coefficients("AP", "MD", 0.1, marginals(d1))
        m = marginals(d1)
        assert np.allclose(t.b[:, 0], m.p_y_given_s[:, 0], atol=1e-12)
        assert np.allclose(t.b[:, 1], -m.p_y_given_s[:, 1], atol=1e-12)

    def test_ap_mr_constant_conventions(self, d1):
        m = marginals(d1)
        res = coefficients("AP", "MR", 0.4, m, ap_mr_convention="resolved")
        flip = coefficients("AP", "MR", 0.4, m, ap_mr_convention="flipped")
        assert np.allclose(res.c[:, 0], 0.4 * m.p_pos, atol=1e-12)
        assert np.allclose(res.c[:, 1], -m.p_y_given_s[:, 1], atol=1e-12)
        assert np.allclose(flip.c, -res.c, atol=1e-12)
        assert res.ap_mr_convention == "resolved"


class TestTableInvariants:
    @pytest.mark.parametrize("notion", NOTIONS)
    def test_a_is_probability_vector(self, notion):
        rng = np.random.default_rng(99)
        for _ in range(20):
            dist = random_distribution(rng, int(rng.integers(2, 8)), int(rng.choice((2, 3))))
            t = coefficients(notion, "MD", 0.2, dist.marginals())
            assert t.included.all()
            assert t.a.sum() == pytest.approx(1.0, abs=1e-12)
            assert (t.a >= 0).all()

    def test_md_mr_differ_only_in_ap_constant(self):
        rng = np.random.default_rng(17)
        dist = random_distribution(rng, 4, 3)
        m = dist.marginals()
        for notion in NOTIONS:
            md = coefficients(notion, "MD", 0.3, m)
            mr = coefficients(notion, "MR", 0.3, m)
            assert np.allclose(md.a, mr.a, atol=1e-15)
            assert np.allclose(md.b, mr.b, atol=1e-15)
            if notion == "AP":
                assert not np.allclose(md.c, mr.c)
            else:
                assert np.allclose(md.c, mr.c, atol=1e-15)

    def test_ap_b_identity_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        dist = random_distribution(rng, 5, 2)
        t = coefficients("AP", "MD", 0.1, dist.marginals())
        # b[m,0] - b[m,1] = P(Y=0|S=m) + P(Y=1|S=m) = 1
        assert np.allclose(t.b[:, 0] - t.b[:, 1], 1.0, atol=1e-12)

    def test_dp_epe_zero_constants(self):
        rng = np.random.default_rng(4)
        dist = random_distribution(rng, 4, 2)
        for notion in ("DP", "EO", "PE"):
            for measure in ("MD", "MR"):
                t = coefficients(notion, measure, 0.7, dist.marginals())
                assert np.allclose(t.c, 0.0)


class TestExclusionsAndErrors:
    def _with_empty_group(self):
        # group 2 has zero mass entirely
        mass = np.array([[[0.4, 0.3], [0.0, 0.0]], [[0.1, 0.2], [0.0, 0.0]]])
        return marginals(DiscreteJointDistribution(support=("x0", "x1"), mass=mass))

    def test_zero_mass_group_excluded_with_warning(self):
        t = coefficients("DP", "MD", 0.1, self._with_empty_group())
        assert t.included.tolist() == [True, False]
        assert any("group 2" in w for w in t.warnings)
        assert np.isnan(t.a[1])

    def test_eo_group_without_positives_excluded(self):
        mass = np.array([[[0.3, 0.3], [0.4, 0.0]]])  # group 2 never has y=1
        t = coefficients("EO", "MD", 0.1, marginals(DiscreteJointDistribution(support=("x",), mass=mass)))
        assert t.included.tolist() == [True, False]

    def test_missing_global_marginal_raises_by_name(self):
        mass = np.array([[[0.6, 0.0], [0.4, 0.0]]])  # no positives at all
        with pytest.raises(UndefinedMarginalError, match="Y=1"):
            coefficients("EO", "MD", 0.1, marginals(DiscreteJointDistribution(support=("x",), mass=mass)))

    def test_unknown_notion_rejected(self, d1):
        with pytest.raises(FairnessDomainError):
            coefficients("EqualizedOdds", "MD", 0.1, marginals(d1))

    def test_bad_delta_rejected(self, d1):
        with pytest.raises(FairnessDomainError):
            coefficients("DP", "MD", -0.1, marginals(d1))
