"""
Area Law Tests

Transforms, moments and Gaussian-limit quantities of A_x checked against
closed forms for the Brownian example (phi^{-1}(t) = sqrt(1 + 2t) - 1) and
the M/M/1-type example (phi'(0) = 1/2, Var T_1 = 4).
"""
import math

import numpy as np
import pytest

from levyarea.engine.area import (
    corr_area, cov_area, cov_area_T, cov_area_levels, gaussian_limit, gaussian_limit_corr, gaussian_limit_cov, gaussian_limit_var,
    hitting_time_lst, joint_lst, joint_lst_fidi, longrun_average, lst_area, lst_two_level, mean_area,
    mean_two_level, moments_area, moments_random_order, normalization, steady_state_mean_reflected,
    steady_state_mean_secondary, var_area, var_two_level,
)
from levyarea.engine.errors import DegenerateFunction, DomainError, LevelsNotIncreasing, OrderViolation
from levyarea.engine.exponent import phi_inverse
from levyarea.engine.holding import ONE, HoldingFunction

LINEAR = HoldingFunction.linear(1.0)


def bm_linear_lst(alpha: float, x: float = 1.0) -> float:
    """exp(-int_0^x (sqrt(1 + 2 alpha y) - 1) dy)."""
    integral = ((1 + 2 * alpha * x) ** 1.5 - 1) / (3 * alpha) - x
    return math.exp(-integral)


# ============================================================================
# Transforms
# ============================================================================

class TestTransforms:

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 2.0])
    def test_bm_linear_closed_form(self, bm_exponent, alpha) -> None:
        assert lst_area(bm_exponent, LINEAR, 1.0, alpha) == pytest.approx(bm_linear_lst(alpha), rel=1e-8)

    def test_constant_holding_is_hitting_time(self, mm1_exponent) -> None:
        h = HoldingFunction.constant(2.0)
        assert lst_area(mm1_exponent, h, 1.5, 0.5) == pytest.approx(hitting_time_lst(mm1_exponent, 1.5, 1.0))

    def test_mm1_hitting_time(self, mm1_exponent) -> None:
        assert hitting_time_lst(mm1_exponent, 1.0, 1.0) == pytest.approx(math.exp(-math.sqrt(2.0)))

    def test_trivial_arguments(self, mm1_exponent) -> None:
        assert lst_area(mm1_exponent, LINEAR, 1.0, 0.0) == 1.0
        assert lst_area(mm1_exponent, LINEAR, 0.0, 3.0) == 1.0

    def test_monotone_in_alpha(self, det_exponent) -> None:
        values = [lst_area(det_exponent, LINEAR, 1.0, a) for a in (0.1, 0.5, 1.0, 4.0)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_lst_derivative_at_zero_is_mean(self, mm1_exponent) -> None:
        eps = 1e-5
        slope = (1.0 - lst_area(mm1_exponent, LINEAR, 1.0, eps)) / eps
        assert slope == pytest.approx(mean_area(mm1_exponent, LINEAR, 1.0), rel=1e-3)

    def test_joint_with_t_reduces_to_constant_shift(self, bm_exponent) -> None:
        # h = g = 1: alpha A + beta T = (alpha + beta) T
        assert joint_lst(bm_exponent, ONE, ONE, 1.0, 0.3, 0.7) == pytest.approx(hitting_time_lst(bm_exponent, 1.0, 1.0))

    def test_negative_arguments(self, bm_exponent) -> None:
        with pytest.raises(DomainError):
            lst_area(bm_exponent, LINEAR, 1.0, -1.0)
        with pytest.raises(DomainError):
            lst_area(bm_exponent, LINEAR, -1.0, 1.0)

    @pytest.mark.parametrize("exp_name", ["bm_exponent", "mm1_exponent", "det_exponent"])
    def test_completely_monotone(self, exp_name, request) -> None:
        exp = request.getfixturevalue(exp_name)
        values = np.array([lst_area(exp, LINEAR, 1.0, 0.5 * j) for j in range(9)])
        for k in range(1, 5):
            assert np.all((-1) ** k * np.diff(values, k) >= -1e-9), k

    @pytest.mark.parametrize("a, b", [(0.0, 4.0), (0.3, 1.1), (1.0, 7.5)])
    def test_chord_lies_above_transform(self, mm1_exponent, a, b) -> None:
        h = HoldingFunction.power(1.0, 0.5)
        for w in (0.25, 0.5, 0.75):
            mid = lst_area(mm1_exponent, h, 1.0, w * a + (1 - w) * b)
            chord = w * lst_area(mm1_exponent, h, 1.0, a) + (1 - w) * lst_area(mm1_exponent, h, 1.0, b)
            assert mid <= chord + 1e-10

    def test_power_holding_below_one(self, mm1_exponent) -> None:
        h = HoldingFunction.power(1.0, 0.5)
        value = lst_area(mm1_exponent, h, 2.0, 1.0)
        assert 0.0 < value < 1.0


class TestTwoLevel:

    def test_equal_levels_reduce_to_hitting_time(self, mm1_exponent) -> None:
        # A_{x,x} = h(0) T_x
        h = HoldingFunction.linear(1.0)
        assert lst_two_level(mm1_exponent, h, 1.0, 1.0, 2.0) == 1.0
        c = HoldingFunction.constant(1.5)
        assert lst_two_level(mm1_exponent, c, 1.0, 1.0, 2.0) == pytest.approx(hitting_time_lst(mm1_exponent, 1.0, 3.0))

    def test_zero_lower_level_is_area(self, bm_exponent) -> None:
        assert lst_two_level(bm_exponent, LINEAR, 0.0, 1.0, 1.0) == pytest.approx(bm_linear_lst(1.0), rel=1e-8)

    def test_order_violation(self, bm_exponent) -> None:
        with pytest.raises(OrderViolation):
            lst_two_level(bm_exponent, LINEAR, 2.0, 1.0, 1.0)

    def test_moments(self, mm1_exponent) -> None:
        # E A_{1,2} = (h(1) * 1 + int_0^1 t dt) / phi'(0) = 3
        assert mean_two_level(mm1_exponent, LINEAR, 1.0, 2.0) == pytest.approx(3.0)
        # Var A_{1,2} = 4 * (1 + 1/3)
        assert var_two_level(mm1_exponent, LINEAR, 1.0, 2.0) == pytest.approx(16.0 / 3.0)


class TestFidi:

    def test_single_level_is_joint_lst(self, mm1_exponent) -> None:
        assert joint_lst_fidi(mm1_exponent, LINEAR, [1.0], [0.5], [0.2]) == pytest.approx(
            joint_lst(mm1_exponent, LINEAR, ONE, 1.0, 0.5, 0.2), rel=1e-9)

    def test_constant_holding_factorizes(self, bm_exponent) -> None:
        # h = 1: A_s = T_s, and T has independent increments
        value = joint_lst_fidi(bm_exponent, ONE, [1.0, 3.0], [0.5, 1.0])
        expected = math.exp(-1.0 * phi_inverse(bm_exponent, 1.5) - 2.0 * phi_inverse(bm_exponent, 1.0))
        assert value == pytest.approx(expected, rel=1e-9)

    def test_zero_weights_on_tail(self, mm1_exponent) -> None:
        value = joint_lst_fidi(mm1_exponent, LINEAR, [1.0, 2.0], [0.7, 0.0])
        assert value == pytest.approx(lst_area(mm1_exponent, LINEAR, 1.0, 0.7), rel=1e-9)

    def test_levels_must_increase(self, mm1_exponent) -> None:
        with pytest.raises(LevelsNotIncreasing):
            joint_lst_fidi(mm1_exponent, LINEAR, [2.0, 1.0], [1.0, 1.0])
        with pytest.raises(LevelsNotIncreasing):
            joint_lst_fidi(mm1_exponent, LINEAR, [1.0, 1.0], [1.0, 1.0])

    def test_empty(self, mm1_exponent) -> None:
        assert joint_lst_fidi(mm1_exponent, LINEAR, [], []) == 1.0


# ============================================================================
# Moments and correlation
# ============================================================================

class TestMoments:

    def test_mm1_mean_and_variance(self, mm1_exponent) -> None:
        assert mean_area(mm1_exponent, LINEAR, 1.0) == pytest.approx(1.0)
        assert var_area(mm1_exponent, LINEAR, 1.0) == pytest.approx(4.0 / 3.0)
        table = moments_area(mm1_exponent, LINEAR, 1.0, 2)
        assert table.mean == pytest.approx(1.0, rel=1e-10)
        assert table.variance == pytest.approx(4.0 / 3.0, rel=1e-10)

    def test_bm_third_moment(self, bm_exponent) -> None:
        # c = (1/2, 1/3, 3/4); mu_3 = c3 + 3 c1 c2 + c1^3
        table = moments_area(bm_exponent, LINEAR, 1.0, 3)
        assert table.c == pytest.approx([0.5, 1.0 / 3.0, 0.75])
        assert table.mu[3] == pytest.approx(1.375)

    def test_order_zero(self, bm_exponent) -> None:
        assert moments_area(bm_exponent, LINEAR, 1.0, 0).mu == [1.0]

    def test_order_beyond_table(self, bm_exponent) -> None:
        with pytest.raises(DomainError):
            moments_area(bm_exponent, LINEAR, 1.0, bm_exponent.n_max + 1)

    def test_constant_holding_moments_are_hitting_time_moments(self, mm1_exponent) -> None:
        table = moments_area(mm1_exponent, ONE, 2.0, 2)
        assert table.mean == pytest.approx(4.0)
        assert table.variance == pytest.approx(8.0)

    def test_random_order_mean(self, mm1_exponent, bm_exponent) -> None:
        # E A_xi = E[xi^2]/2 / phi'(0) = 1/(rate^2 phi'(0))
        assert moments_random_order(bm_exponent, 2.0, 1)[0] == pytest.approx(0.25)
        assert moments_random_order(mm1_exponent, 1.0, 1)[0] == pytest.approx(2.0)

    def test_random_order_recursion_spread(self, mm1_exponent) -> None:
        # mu2 - mu1^2 of the recursion is the averaged conditional variance E[Var(A_xi | xi)] = Var T_1 E[xi^3]/3
        rate = 1.5
        mu = moments_random_order(mm1_exponent, rate, 2)
        assert mu[1] - mu[0] ** 2 == pytest.approx(mm1_exponent.var_t1 * 2.0 / rate ** 3, rel=1e-10)

    def test_random_order_rejects_bad_rate(self, bm_exponent) -> None:
        with pytest.raises(DomainError):
            moments_random_order(bm_exponent, 0.0, 2)
        assert moments_random_order(bm_exponent, 1.0, 0) == []


class TestCovariance:

    def test_corr_with_hitting_time_is_process_free(self) -> None:
        assert corr_area(LINEAR, ONE, 1.0) == pytest.approx(math.sqrt(3) / 2)
        assert corr_area(LINEAR, ONE, 7.0) == pytest.approx(math.sqrt(3) / 2)

    def test_cov_with_t(self, mm1_exponent) -> None:
        assert cov_area_T(mm1_exponent, LINEAR, 1.0) == pytest.approx(2.0)
        assert cov_area(mm1_exponent, LINEAR, ONE, 1.0) == pytest.approx(2.0)

    def test_degenerate(self) -> None:
        with pytest.raises(DegenerateFunction):
            corr_area(HoldingFunction.constant(0.0), ONE, 1.0)


# ============================================================================
# Long-run and Gaussian limit
# ============================================================================

class TestLongRun:

    def test_longrun_average(self) -> None:
        assert longrun_average(LINEAR, 2.0) == pytest.approx(1.0)
        assert longrun_average(HoldingFunction.constant(3.0), 5.0) == pytest.approx(3.0)

    def test_steady_state_means(self, mm1_exponent) -> None:
        assert steady_state_mean_reflected(mm1_exponent) == pytest.approx(0.5)
        assert steady_state_mean_secondary(mm1_exponent, 2.0) - steady_state_mean_reflected(mm1_exponent) == pytest.approx(1.0)


class TestGaussianLimit:

    def test_variance(self, mm1_exponent) -> None:
        gl = gaussian_limit(mm1_exponent, LINEAR)
        assert gaussian_limit_var(gl, 1.0) == pytest.approx(4.0 / 3.0)
        assert gaussian_limit_var(gaussian_limit(mm1_exponent, ONE), 2.0) == pytest.approx(8.0)

    def test_integer_index_covariance(self, bm_exponent) -> None:
        gl = gaussian_limit(bm_exponent, LINEAR)
        # int_0^x s (y + s) ds = y x^2/2 + x^3/3
        assert gaussian_limit_cov(gl, 1.0, 2.0) == pytest.approx(1.0 + 1.0 / 3.0)

    def test_fractional_index_covariance_by_quadrature(self, bm_exponent) -> None:
        gl = gaussian_limit(bm_exponent, HoldingFunction.power(1.0, 0.5))
        assert gaussian_limit_cov(gl, 1.0, 0.0) == pytest.approx(gaussian_limit_var(gl, 1.0))
        assert gaussian_limit_cov(gl, 1.0, 1e-12) == pytest.approx(gaussian_limit_var(gl, 1.0), rel=1e-6)

    def test_correlation_is_process_free(self, bm_exponent, mm1_exponent) -> None:
        a = gaussian_limit_corr(gaussian_limit(bm_exponent, LINEAR), 1.0, 1.0)
        b = gaussian_limit_corr(gaussian_limit(mm1_exponent, LINEAR), 1.0, 1.0)
        assert a == pytest.approx(b)
        assert 0.0 < a < 1.0

    def test_covariance_across_levels(self, bm_exponent, mm1_exponent) -> None:
        # Var T_1 int_0^1 u (u + 2) du
        assert cov_area_levels(bm_exponent, LINEAR, 1.0, 2.0) == pytest.approx(4.0 / 3.0, rel=1e-8)
        assert cov_area_levels(mm1_exponent, LINEAR, 1.5, 0.0) == pytest.approx(var_area(mm1_exponent, LINEAR, 1.5))
        with pytest.raises(DomainError):
            cov_area_levels(mm1_exponent, LINEAR, 1.0, -1.0)

    @pytest.mark.parametrize("n", [1.0, 50.0, 1e4])
    def test_scaled_covariance_is_the_limit_for_linear_holding(self, mm1_exponent, n) -> None:
        gl = gaussian_limit(mm1_exponent, LINEAR)
        scaled = cov_area_levels(mm1_exponent, LINEAR, n * 1.0, n * 0.5) / normalization(LINEAR, n) ** 2
        assert scaled == pytest.approx(gaussian_limit_cov(gl, 1.0, 0.5), rel=1e-7)

    def test_normalization(self) -> None:
        assert normalization(HoldingFunction.power(2.0, 1.5), 4.0) == pytest.approx(2.0 * 4.0 ** 2)
        assert normalization(ONE, 9.0) == pytest.approx(3.0)
