import numpy as np
import pytest

from fairthresh.coefficients import coefficients
from fairthresh.core import FairnessSpec, RandomizedClassifier
from fairthresh.measures import cs_risk
from fairthresh.oracle import (
    build_lp,
    enumerate_deterministic,
    lagrangian_objective,
    optimum_by_vertex_enumeration,
    random_classifier,
    random_distribution,
    random_multipliers,
    resolve_ap_mr_sign,
    resolve_eodds_normalization,
    solve_inequalities,
    solve_lp,
)
from fairthresh.oracle.verify import (
    check_antisymmetry,
    check_cost_threshold_identity,
    check_lambda_zero_recovery,
    check_lp_feasibility_witness,
    check_lp_grid_consistency,
    check_md_equivalence,
    check_mr_equivalence,
    check_simplex_against_vertices,
    check_threshold_optimality,
)


class TestSimplex:
    def test_box_only(self):
        res = solve_inequalities(np.array([-1.0]), np.array([[1.0]]), np.array([1.0]))
        assert res.status == "optimal"
        assert res.x[0] == pytest.approx(1.0)
        assert res.objective == pytest.approx(-1.0)

    def test_binding_row(self):
        res = solve_inequalities(np.array([-1.0]), np.array([[1.0], [1.0]]), np.array([0.3, 1.0]))
        assert res.objective == pytest.approx(-0.3)

    def test_infeasible(self):
        # x <= -1 with x >= 0
        res = solve_inequalities(np.array([1.0]), np.array([[1.0]]), np.array([-1.0]))
        assert res.status == "infeasible"

    def test_unbounded(self):
        res = solve_inequalities(np.array([-1.0]), np.zeros((0, 1)), np.zeros(0))
        assert res.status == "unbounded"

    def test_negative_rhs_feasible(self):
        # -x <= -0.4  (x >= 0.4), minimize x, x <= 1
        res = solve_inequalities(np.array([1.0]), np.array([[-1.0], [1.0]]), np.array([-0.4, 1.0]))
        assert res.status == "optimal"
        assert res.x[0] == pytest.approx(0.4)

    def test_matches_scipy_on_random_lps(self):
        scipy_opt = pytest.importorskip("scipy.optimize")
        rng = np.random.default_rng(8)
        agree = 0
        for _ in range(60):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 6))
            cost = rng.normal(size=n)
            a = rng.normal(size=(m, n))
            b = rng.normal(size=m)
            ours = solve_inequalities(cost, np.vstack([a, np.eye(n)]), np.concatenate([b, np.ones(n)]))
            ref = scipy_opt.linprog(cost, A_ub=a, b_ub=b, bounds=[(0, 1)] * n, method="highs")
            if ours.status == "optimal":
                assert ref.status == 0
                assert ours.objective == pytest.approx(ref.fun, abs=1e-8)
                agree += 1
            else:
                assert ref.status in (2,)  # infeasible
        assert agree > 10


class TestFairLP:
    def test_d1_dimensions(self, d1):
        spec = FairnessSpec(notion="DP", measure="MD", delta=0.05)
        lp = build_lp(d1, spec, 0.5)
        assert lp.n_vars == 2
        assert lp.v.shape == (2, 2)
        assert lp.lower == -0.05 and lp.upper == 0.05

    def test_single_point_single_group_trivial(self):
        mass = np.array([[[0.4, 0.6]]])
        from fairthresh.core import DiscreteJointDistribution

        dist = DiscreteJointDistribution(support=("x",), mass=mass)
        spec = FairnessSpec(notion="DP", measure="MD", delta=0.1)
        lp = build_lp(dist, spec, 0.5)
        sol = solve_lp(lp)
        assert sol.status == "optimal"
        # eta = 0.6 > cost: accept, risk = cost * P(Y=0)
        assert sol.f[0] == pytest.approx(1.0)
        assert sol.risk == pytest.approx(0.5 * 0.4, abs=1e-12)

    def test_linear_form_reconstruction(self, d1):
        # W + v.f must equal the measured linear form for random classifiers
        rng = np.random.default_rng(12)
        spec = FairnessSpec(notion="EO", measure="MD", delta=0.3)
        lp = build_lp(d1, spec, 0.5)
        from fairthresh.measures import r_md_all

        t = coefficients("EO", "MD", 0.3, d1.marginals())
        for _ in range(10):
            f = random_classifier(rng, 2)
            forms = r_md_all(f, d1, t)
            rebuilt = lp.w + lp.v @ f.accept
            assert np.allclose(rebuilt, forms, atol=1e-12)

    def test_objective_reconstruction(self, d1):
        lp = build_lp(d1, FairnessSpec(notion="DP", measure="MD", delta=0.3), 0.35)
        rng = np.random.default_rng(13)
        f = random_classifier(rng, 2)
        assert lp.u @ f.accept + lp.risk_constant == pytest.approx(cs_risk(f, d1, 0.35), abs=1e-12)

    def test_mr_bounds(self, d1):
        lp = build_lp(d1, FairnessSpec(notion="DP", measure="MR", delta=0.8), 0.5)
        assert lp.lower == pytest.approx(-0.2)
        assert lp.upper == 0.0

    def test_tight_delta_zero_still_feasible_dp(self, d1):
        lp = build_lp(d1, FairnessSpec(notion="DP", measure="MD", delta=0.0), 0.5)
        assert solve_lp(lp).status == "optimal"


class TestEnumeration:
    def test_d1_cost_half_minimizer(self, d1):
        # eta = (0.3, 0.7): reject x0, accept x1
        m = d1.marginals()

        def objective(batch):
            return batch @ ((0.5 - m.eta) * m.p_x)

        best, val = enumerate_deterministic(d1, objective)
        assert best.tolist() == [0, 1]
        assert val == pytest.approx(-0.2 * 0.5, abs=1e-12)

    def test_constant_objective_ties_resolve_low(self, d1):
        best, val = enumerate_deterministic(d1, lambda batch: np.zeros(batch.shape[0]))
        assert best.tolist() == [0, 0]
        assert val == 0.0

    def test_support_cap(self):
        rng = np.random.default_rng(1)
        dist = random_distribution(rng, 4, 2)
        with pytest.raises(Exception):
            enumerate_deterministic(dist, lambda b: np.zeros(b.shape[0]), max_support=3)

    def test_matches_threshold_rule(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            dist = random_distribution(rng, int(rng.integers(2, 7)), 2)
            lam = random_multipliers(rng, 2)
            cost = float(rng.uniform(0.2, 0.8))
            t = coefficients("DP", "MD", 0.5, dist.marginals())
            objective = lagrangian_objective(dist, t, lam, cost)
            _, val_enum = enumerate_deterministic(dist, objective)
            from fairthresh.bayes import apply_threshold
            from fairthresh.oracle.verify import threshold_scores_for

            f = apply_threshold(threshold_scores_for(dist, t, lam, cost)).astype(float)
            assert float(objective(f[None, :])[0]) == pytest.approx(val_enum, abs=1e-9)


class TestResolvers:
    def test_ap_mr_sign_unique_winner(self):
        convention, details = resolve_ap_mr_sign(instances=200, seed=20240810)
        assert convention == "resolved"
        assert details["flipped"]["failures"] > 0

    def test_eodds_normalization_unique_winner(self):
        form, details = resolve_eodds_normalization(instances=80, seed=20240810)
        assert form == "plain"
        assert details["rescaled"]["failures"] > 0

    def test_m1_instances_vacuous_for_mr(self):
        # with one group every ratio is 1: both conventions agree trivially
        rng = np.random.default_rng(15)
        from fairthresh.measures import r_mr_all

        dist = random_distribution(rng, 4, 1)
        f = random_classifier(rng, 4)
        for conv in ("resolved", "flipped"):
            t = coefficients("DP", "MR", 0.5, dist.marginals(), ap_mr_convention=conv)
            vals = r_mr_all(f, dist, t)
            assert (vals <= 1e-12).all() and (vals >= -0.5 - 1e-12).all()


class TestSuiteChecks:
    @pytest.mark.parametrize("notion", ("DP", "EO", "PE", "AP"))
    def test_md_equivalence(self, notion):
        res = check_md_equivalence(notion, instances=40, seed=101)
        assert res.passed, res.to_dict()

    @pytest.mark.parametrize("notion", ("DP", "EO", "PE", "AP"))
    def test_mr_equivalence(self, notion):
        res = check_mr_equivalence(notion, instances=40, seed=103)
        assert res.passed, res.to_dict()

    def test_antisymmetry(self):
        assert check_antisymmetry(instances=40, seed=105).passed

    @pytest.mark.parametrize("measure", ("MD", "MR"))
    def test_threshold_optimality(self, measure):
        res = check_threshold_optimality("DP", measure, instances=25, seed=107, n_max=8)
        assert res.passed, res.to_dict()

    def test_lambda_zero(self):
        assert check_lambda_zero_recovery(instances=10, seed=109).passed

    def test_cost_identity(self):
        assert check_cost_threshold_identity(instances=25, seed=111).passed

    def test_simplex_vs_vertices(self):
        res = check_simplex_against_vertices(instances=50, seed=113)
        assert res.passed and res.details["solved"] > 20

    def test_feasibility_witness(self):
        assert check_lp_feasibility_witness(instances=25, seed=115).passed

    def test_lp_grid_small(self):
        res = check_lp_grid_consistency(instances=5, seed=117)
        assert res.passed, res.to_dict()


class TestVertexEnumeration:
    def test_agrees_with_simplex(self):
        rng = np.random.default_rng(16)
        solved = 0
        for _ in range(40):
            dist = random_distribution(rng, int(rng.integers(1, 4)), 2)
            spec = FairnessSpec(
                notion=str(rng.choice(("DP", "EO", "PE"))),
                measure="MD",
                delta=float(rng.uniform(0.05, 0.5)),
            )
            lp = build_lp(dist, spec, float(rng.uniform(0.2, 0.8)))
            sol = solve_lp(lp)
            vertex = optimum_by_vertex_enumeration(lp)
            if sol.status == "optimal":
                solved += 1
                assert vertex is not None
                assert sol.objective == pytest.approx(vertex, abs=1e-10)
        assert solved > 20


class TestLagrangianObjective:
    def test_vectorized_matches_reference_path(self):
        from fairthresh.oracle.verify import lagrangian_objective, lagrangian_values

        rng = np.random.default_rng(18)
        for _ in range(20):
            dist = random_distribution(rng, int(rng.integers(2, 7)), int(rng.choice((2, 3))))
            lam = random_multipliers(rng, dist.n_groups)
            cost = float(rng.uniform(0.1, 0.9))
            notion = str(rng.choice(("DP", "EO", "PE", "AP")))
            measure = str(rng.choice(("MD", "MR")))
            t = coefficients(notion, measure, float(rng.uniform(0, 1)), dist.marginals())
            batch = (rng.random((8, dist.n_support)) > 0.5).astype(float)
            fast = lagrangian_objective(dist, t, lam, cost)(batch)
            slow = lagrangian_values(batch, dist, t, lam, cost)
            assert np.abs(fast - slow).max() < 1e-12
