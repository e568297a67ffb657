import numpy as np
import pytest

from logstab.errors import DimensionError, InvalidInputError
from logstab.linalg import NormKind, induced_matrix_norm
from logstab.lognorm import (
    log_norm,
    log_norm_all_routes,
    log_norm_limit_estimate,
    log_norm_limit_table,
    log_norm_pair,
    log_norm_quadratic_form,
)
from logstab.system import jacobian

from conftest import planar_demo_mu_l2, random_spd

UPPER_TRIANGULAR = np.array([[-2.0, 1.0], [0.0, -3.0]])


def make_kind(tag, rng, n):
    if tag == "weighted":
        return NormKind.weighted(random_spd(rng, n))
    return NormKind(tag)


class TestClosedForms:
    @pytest.mark.parametrize("tag", ["l1", "l2", "linf", "weighted"])
    def test_zero_matrix(self, tag):
        kind = make_kind(tag, np.random.default_rng(0), 3)
        assert log_norm(np.zeros((3, 3)), kind) == pytest.approx(0.0, abs=1e-14)

    def test_l2_hand_value(self):
        # A + A^T = [[-4, 1], [1, -6]], top eigenvalue -5 + sqrt(2)
        assert log_norm(UPPER_TRIANGULAR, NormKind.l2()) == pytest.approx(
            (-5.0 + np.sqrt(2.0)) / 2.0, abs=1e-13
        )

    def test_l1_and_linf_hand_values(self):
        assert log_norm(UPPER_TRIANGULAR, NormKind.l1()) == pytest.approx(-2.0, abs=1e-14)
        assert log_norm(UPPER_TRIANGULAR, NormKind.linf()) == pytest.approx(-1.0, abs=1e-14)

    def test_demo_jacobian_at_origin(self, fig1_system):
        # J = [[-5, 0], [5, -3]]; closed-form value -4 + sqrt(29)/2
        j = jacobian(fig1_system, np.zeros(2), 0.0)
        assert np.allclose(j, [[-5.0, 0.0], [5.0, -3.0]], atol=1e-14)
        mu = log_norm(j, NormKind.l2())
        assert mu == pytest.approx(-4.0 + 0.5 * np.sqrt(29.0), abs=1e-12)
        assert mu == pytest.approx(planar_demo_mu_l2(np.zeros(2), 0.0), abs=1e-12)

    def test_demo_formula_oracle_at_random_points(self, fig1_system):
        rng = np.random.default_rng(2)
        for _ in range(200):
            x = rng.uniform(-10.0, 10.0, size=2)
            t = rng.uniform(0.0, 2.0)
            mu = log_norm(jacobian(fig1_system, x, t), NormKind.l2())
            assert mu == pytest.approx(planar_demo_mu_l2(x, t), abs=1e-11)

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            log_norm(np.ones((2, 3)), NormKind.l2())


class TestLimitEstimate:
    def test_identity_exact(self):
        # ||I + theta*I|| = 1 + theta exactly, so every raw value is 1
        table = log_norm_limit_table(np.eye(3), NormKind.l2())
        assert table.value == pytest.approx(1.0, abs=1e-9)
        assert len(table.successive_diffs) == len(table.thetas) - 1

    def test_matches_closed_form_l2(self):
        est = log_norm_limit_estimate(UPPER_TRIANGULAR, NormKind.l2())
        assert est == pytest.approx((-5.0 + np.sqrt(2.0)) / 2.0, abs=1e-6)

    def test_matches_closed_form_l1(self):
        # for small theta the difference quotient is exactly constant
        est = log_norm_limit_estimate(UPPER_TRIANGULAR, NormKind.l1())
        assert est == pytest.approx(-2.0, abs=1e-9)

    def test_empty_sequence_rejected(self):
        with pytest.raises(InvalidInputError):
            log_norm_limit_estimate(np.eye(2), NormKind.l2(), theta_seq=[])

    def test_non_decreasing_sequence_rejected(self):
        with pytest.raises(InvalidInputError):
            log_norm_limit_estimate(np.eye(2), NormKind.l2(), theta_seq=[1e-2, 1e-1])
        with pytest.raises(InvalidInputError):
            log_norm_limit_estimate(np.eye(2), NormKind.l2(), theta_seq=[1e-2, -1e-3])

    @pytest.mark.parametrize("tag", ["l1", "l2", "linf", "weighted"])
    def test_oracle_triangle(self, tag):
        # closed form, limit estimate and (weighted) quadratic form agree
        rng = np.random.default_rng(17)
        for _ in range(50):
            n = int(rng.integers(2, 7))
            kind = make_kind(tag, rng, n)
            a = rng.normal(size=(n, n))
            cf = log_norm(a, kind)
            le = log_norm_limit_estimate(a, kind)
            assert abs(cf - le) <= 1e-6 * max(1.0, abs(cf))
            if tag == "weighted":
                qf = log_norm_quadratic_form(a, kind.weight)
                assert abs(cf - qf) <= 1e-8 * max(1.0, abs(cf))


class TestQuadraticForm:
    def test_identity_weight_reduces_to_l2(self):
        rng = np.random.default_rng(23)
        a = rng.normal(size=(3, 3))
        assert log_norm_quadratic_form(a, np.eye(3)) == pytest.approx(
            log_norm(a, NormKind.l2()), abs=1e-12
        )

    def test_commuting_diagonal_case(self):
        # diagonal A and P: the transform is a no-op, value is the top diagonal
        assert log_norm_quadratic_form(np.diag([-1.0, -2.0]), np.diag([1.0, 4.0])) == pytest.approx(
            -1.0, abs=1e-13
        )

    def test_matches_weighted_closed_form(self):
        rng = np.random.default_rng(29)
        for _ in range(25):
            a = rng.normal(size=(4, 4))
            p = random_spd(rng, 4)
            qf = log_norm_quadratic_form(a, p)
            cf = log_norm(a, NormKind.weighted(p))
            assert abs(qf - cf) <= 1e-8 * max(1.0, abs(cf))


class TestProperties:
    @pytest.mark.parametrize("tag", ["l1", "l2", "linf", "weighted"])
    def test_convexity_and_lipschitz(self, tag):
        rng = np.random.default_rng(31)
        kind = make_kind(tag, rng, 3)
        worst_convex = worst_lip = -np.inf
        for _ in range(1000):
            a = rng.normal(size=(3, 3))
            b = rng.normal(size=(3, 3))
            c = rng.uniform()
            mu_a, mu_b = log_norm(a, kind), log_norm(b, kind)
            worst_convex = max(
                worst_convex, log_norm(c * a + (1 - c) * b, kind) - (c * mu_a + (1 - c) * mu_b)
            )
            worst_lip = max(worst_lip, abs(mu_a - mu_b) - induced_matrix_norm(a - b, kind))
        assert worst_convex <= 1e-10
        assert worst_lip <= 1e-10

    @pytest.mark.parametrize("tag", ["l1", "l2", "linf", "weighted"])
    def test_translation_and_homogeneity(self, tag):
        rng = np.random.default_rng(37)
        kind = make_kind(tag, rng, 4)
        for _ in range(100):
            a = rng.normal(size=(4, 4))
            c = rng.uniform(-3.0, 3.0)
            mu = log_norm(a, kind)
            assert log_norm(a + c * np.eye(4), kind) == pytest.approx(mu + c, abs=1e-12)
            s = abs(c)
            assert log_norm(s * a, kind) == pytest.approx(s * mu, abs=1e-12 * max(1.0, s))

    @pytest.mark.parametrize("tag", ["l1", "l2", "linf", "weighted"])
    def test_norm_bounds_and_spectral_bound(self, tag):
        rng = np.random.default_rng(41)
        kind = make_kind(tag, rng, 4)
        for _ in range(200):
            a = rng.normal(size=(4, 4))
            mu = log_norm(a, kind)
            na = induced_matrix_norm(a, kind)
            assert -na - 1e-12 <= mu <= na + 1e-12
            tri = np.triu(a)  # eigenvalues on the diagonal
            assert tri.diagonal().max() <= log_norm(tri, kind) + 1e-12

    def test_pair_helper_matches_single_calls(self):
        rng = np.random.default_rng(43)
        for tag in ("l1", "l2", "linf", "weighted"):
            kind = make_kind(tag, rng, 3)
            a = rng.normal(size=(3, 3))
            mp, mm = log_norm_pair(a, kind)
            assert mp == pytest.approx(log_norm(a, kind), abs=1e-13)
            assert mm == pytest.approx(log_norm(-a, kind), abs=1e-13)

    def test_all_routes_reports_methods(self):
        rng = np.random.default_rng(47)
        routes = log_norm_all_routes(rng.normal(size=(3, 3)), NormKind.weighted(random_spd(rng, 3)))
        assert [r.method for r in routes] == ["closed_form", "limit_estimate", "quadratic_form"]
        assert all(-np.inf < r.value < np.inf for r in routes)
