"""
Holding Function Tests
"""
import numpy as np
import pytest
from scipy import integrate

from levyarea.engine.errors import DomainError, InvalidParameter
from levyarea.engine.holding import ONE, HoldingFunction


KINKED = HoldingFunction.piecewise_linear([(0.0, 0.0), (1.0, 2.0), (3.0, 2.0), (4.0, 5.0)])

CATALOG = [
    HoldingFunction.constant(2.0),
    HoldingFunction.linear(1.5),
    HoldingFunction.power(1.0, 0.5),
    HoldingFunction.power(2.0, 2.5),
    KINKED,
]


class TestConstruction:

    def test_piecewise_needs_origin_knot(self) -> None:
        with pytest.raises(InvalidParameter):
            HoldingFunction.piecewise_linear([(0.5, 1.0), (1.0, 2.0)])

    def test_piecewise_needs_increasing_abscissae(self) -> None:
        with pytest.raises(InvalidParameter):
            HoldingFunction.piecewise_linear([(0.0, 1.0), (1.0, 2.0), (1.0, 3.0)])

    def test_power_needs_positive_gamma(self) -> None:
        with pytest.raises(InvalidParameter):
            HoldingFunction.power(1.0, 0.0)

    def test_negative_constant_rejected(self) -> None:
        with pytest.raises(InvalidParameter):
            HoldingFunction.constant(-1.0)


class TestEvaluation:

    def test_piecewise_values(self) -> None:
        assert KINKED.at(0.5) == pytest.approx(1.0)
        assert KINKED.at(2.0) == pytest.approx(2.0)
        assert KINKED.at(3.5) == pytest.approx(3.5)
        assert KINKED.at(10.0) == pytest.approx(5.0)

    @pytest.mark.parametrize("h", CATALOG, ids=lambda h: h.kind)
    def test_scalar_and_vector_agree(self, h) -> None:
        grid = np.linspace(0.0, 5.0, 17)
        np.testing.assert_allclose(h.value(grid), [h.at(t) for t in grid], rtol=1e-14)

    def test_negative_argument(self) -> None:
        with pytest.raises(DomainError):
            ONE.value(-1.0)


class TestIntegrals:

    def test_closed_forms(self) -> None:
        assert HoldingFunction.linear(1.0).antiderivative(2.0) == pytest.approx(2.0)
        assert HoldingFunction.power(1.0, 2.0).power_integral(1, 1.0) == pytest.approx(1.0 / 3.0)
        assert HoldingFunction.linear(1.0).power_integral(2, 1.0) == pytest.approx(1.0 / 3.0)
        assert KINKED.antiderivative(4.0) == pytest.approx(1.0 + 4.0 + 3.5)

    @pytest.mark.parametrize("h", CATALOG, ids=lambda h: h.kind)
    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_power_integral_matches_quadrature(self, h, k) -> None:
        x = 4.5
        numeric, _ = integrate.quad(lambda t: h.at(t) ** k, 0.0, x, points=[1.0, 3.0, 4.0], limit=200)
        assert h.power_integral(k, x) == pytest.approx(numeric, rel=1e-9)

    def test_product_integral_monomials(self) -> None:
        h = HoldingFunction.linear(2.0)
        g = HoldingFunction.power(1.0, 0.5)
        assert h.product_integral(g, 1.0) == pytest.approx(2.0 / 2.5)

    def test_product_integral_with_kinks(self) -> None:
        numeric, _ = integrate.quad(lambda t: KINKED.at(t) * t, 0.0, 4.0, points=[1.0, 3.0])
        assert KINKED.product_integral(HoldingFunction.linear(1.0), 4.0) == pytest.approx(numeric, rel=1e-9)

    def test_integral_between(self) -> None:
        assert KINKED.integral(1.0, 3.0) == pytest.approx(4.0)


class TestShape:

    def test_nondecreasing(self) -> None:
        assert KINKED.is_nondecreasing()
        assert not HoldingFunction.piecewise_linear([(0.0, 2.0), (1.0, 1.0)]).is_nondecreasing()

    def test_zero_function(self) -> None:
        assert HoldingFunction.constant(0.0).is_zero_on(3.0)
        assert not ONE.is_zero_on(3.0)

    def test_rv_index(self) -> None:
        assert ONE.rv_index == 0.0
        assert HoldingFunction.linear(3.0).rv_index == 1.0
        assert HoldingFunction.power(1.0, 0.7).rv_index == 0.7

    def test_to_dict(self) -> None:
        assert HoldingFunction.power(1.0, 0.5).to_dict() == {"kind": "power", "c": 1.0, "gamma": 0.5}
        assert KINKED.to_dict()["knots"][1] == [1.0, 2.0]
