import numpy as np
import pytest

from mustab.fields import (
    CERTIFIED,
    REFUTED,
    UNDECIDED,
    DilationMap,
    FieldError,
    Monomial,
    PolyMap,
    check_cooperative,
    check_nondecreasing,
    check_omega_condition,
    eval_field,
    fast_evaluator,
    homogeneity_degree,
    jacobian,
    NOT_HOMOGENEOUS,
)


def paper_f():
    return PolyMap(2, [
        [(-5.0, (3, 0)), (2.0, (1, 1))],
        [(1.0, (2, 1)), (-4.0, (0, 2))],
    ])


def paper_g():
    return PolyMap(2, [
        [(1.0, (1, 1))],
        [(2.0, (4, 0))],
    ])


class TestPolyMap:
    def test_like_terms_merge(self):
        F = PolyMap(1, [[(2.0, (3,)), (1.5, (3,)), (1.0, (1,))]])
        assert len(F.components[0]) == 2
        assert eval_field(F, np.array([2.0]))[0] == pytest.approx(3.5 * 8 + 2.0)

    def test_cancelling_terms_drop(self):
        F = PolyMap(1, [[(1.0, (2,)), (-1.0, (2,))]])
        assert F.is_zero()

    def test_zero_coefficient_rejected(self):
        with pytest.raises(FieldError):
            Monomial(0.0, (1,))

    def test_negative_exponent_rejected_by_default(self):
        with pytest.raises(FieldError):
            PolyMap(1, [[(1.0, (-1.0,))]])
        # but representable when asked for
        F = PolyMap(1, [[(1.0, (-1.0,))]], allow_negative_exponents=True)
        assert F.min_exponent == -1.0

    def test_dimension_mismatch(self):
        with pytest.raises(FieldError):
            PolyMap(2, [[(1.0, (1,))], []])

    def test_constant_term_uses_zero_power_convention(self):
        F = PolyMap(1, [[(3.0, (0.0,))]])
        assert eval_field(F, np.array([0.0]))[0] == 3.0

    def test_eval_at_origin(self):
        assert np.allclose(eval_field(paper_f(), np.zeros(2)), 0.0)

    def test_eval_paper_point(self):
        # hand-evaluated at (1, 1)
        assert np.allclose(eval_field(paper_f(), np.ones(2)), [-3.0, -3.0])
        assert np.allclose(eval_field(paper_g(), np.ones(2)), [1.0, 2.0])


class TestFastEvaluator:
    def test_matches_reference(self):
        rng = np.random.default_rng(3)
        F = paper_f()
        fe = fast_evaluator(F)
        for _ in range(50):
            x = rng.uniform(0.0, 5.0, size=2)
            assert np.allclose(fe(x), eval_field(F, x), rtol=1e-14, atol=0)

    def test_zero_map(self):
        fe = fast_evaluator(PolyMap(2, [[], []]))
        assert np.all(fe(np.ones(2)) == 0.0)

    def test_rejects_negative_exponents(self):
        F = PolyMap(1, [[(1.0, (-1.0,))]], allow_negative_exponents=True)
        with pytest.raises(FieldError):
            fast_evaluator(F)


class TestJacobian:
    def test_against_finite_differences(self):
        rng = np.random.default_rng(4)
        F = paper_f()
        for _ in range(10):
            x = rng.uniform(0.5, 3.0, size=2)
            J = jacobian(F, x)
            eps = 1e-7
            for j in range(2):
                dx = np.zeros(2)
                dx[j] = eps
                fd = (eval_field(F, x + dx) - eval_field(F, x - dx)) / (2 * eps)
                assert np.allclose(J[:, j], fd, rtol=1e-5, atol=1e-7)

    def test_requires_positive_point(self):
        with pytest.raises(FieldError):
            jacobian(paper_f(), np.array([1.0, 0.0]))


class TestCooperative:
    def test_paper_f_certified(self):
        assert check_cooperative(paper_f()).status == CERTIFIED

    def test_negative_cross_term_refuted(self):
        F = PolyMap(2, [[(-1.0, (0, 1))], [(1.0, (1, 0))]])
        v = check_cooperative(F)
        assert v.status == REFUTED
        i, j, x = v.witness
        assert (i, j) == (0, 1)
        assert jacobian(F, x)[0, 1] < 0

    def test_mixed_sign_can_stay_undecided(self):
        # -x1*x2 + 2*x1*x2 is cooperative but written with a negative term;
        # canonical merging resolves it before the check runs
        F = PolyMap(2, [[(-1.0, (1, 1)), (2.0, (1, 1))], [(1.0, (1, 0))]])
        assert check_cooperative(F).status == CERTIFIED


class TestNondecreasing:
    def test_paper_g_certified(self):
        assert check_nondecreasing(paper_g()).status == CERTIFIED

    def test_decreasing_refuted(self):
        G = PolyMap(1, [[(-1.0, (2.0,))]])
        assert check_nondecreasing(G).status == REFUTED


class TestDilation:
    def test_weights_must_be_positive(self):
        with pytest.raises(FieldError):
            DilationMap((1.0, 0.0))

    def test_apply(self):
        r = DilationMap((1.0, 2.0))
        assert np.allclose(r.apply(3.0, [1.0, 1.0]), [3.0, 9.0])


class TestHomogeneity:
    def test_paper_system_degree_two(self):
        r = DilationMap((1.0, 2.0))
        assert homogeneity_degree(paper_f(), r) == pytest.approx(2.0)
        assert homogeneity_degree(paper_g(), r) == pytest.approx(2.0)

    def test_scaling_identity(self):
        # the defining relation F(dilate(lam, x)) = lam^p dilate(lam, F(x))
        rng = np.random.default_rng(5)
        F, r = paper_f(), DilationMap((1.0, 2.0))
        p = homogeneity_degree(F, r)
        for _ in range(20):
            x = rng.uniform(0.1, 3.0, size=2)
            lam = rng.uniform(0.5, 2.0)
            lhs = eval_field(F, r.apply(lam, x))
            rhs = lam ** p * r.apply(lam, eval_field(F, x))
            assert np.allclose(lhs, rhs, rtol=1e-12)

    def test_violation_reports_witness(self):
        F = PolyMap(2, [[(1.0, (3, 0)), (1.0, (1, 0))], [(1.0, (0, 2))]])
        status, where = homogeneity_degree(F, DilationMap((1.0, 2.0)))
        assert status == NOT_HOMOGENEOUS
        assert where == (0, 1)

    def test_zero_map_rejected(self):
        with pytest.raises(FieldError):
            homogeneity_degree(PolyMap(1, [[]]), DilationMap((1.0,)))


class TestOmegaCondition:
    def test_linear_self_term_certified(self):
        g = paper_g()
        assert check_omega_condition(g, 0).status == CERTIFIED

    def test_no_self_dependence_refuted(self):
        # component 1 is 2*x1^4: ratio g_1/x_2 vanishes as x_2 grows
        g = paper_g()
        assert check_omega_condition(g, 1).status == REFUTED

    def test_superlinear_self_term_refuted(self):
        # x_i^2 is not bounded below by a positive multiple of x_i near 0
        G = PolyMap(1, [[(1.0, (2.0,))]])
        assert check_omega_condition(G, 0).status == REFUTED

    def test_index_range(self):
        with pytest.raises(FieldError):
            check_omega_condition(paper_g(), 2)
