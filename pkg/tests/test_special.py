"""Test cases for special functions"""
import math

import mpmath
import numpy as np
import pytest
from numpy.polynomial.laguerre import laggauss
from scipy.special import eval_hermite, eval_laguerre

from app.models import DomainError, NumericalIntegrityError
from app.tools.special import (
    hermite_complex,
    hermite_sequence,
    laguerre,
    laguerre_sequence,
    log_poisson_pmf,
    poisson_cdf,
    poisson_survival,
    regularized_lower_gamma,
    regularized_lower_gamma_sequence,
)


def mp_lower_gamma(n_plus_1: int, x: float) -> float:
    with mpmath.workdps(40):
        return float(mpmath.gammainc(n_plus_1, 0, x, regularized=True))


class TestRegularizedLowerGamma:
    """Test P(n+1, x) against extended precision"""

    @pytest.mark.parametrize("n", [0, 1, 5, 20])
    @pytest.mark.parametrize("x", [0.25, 1.0, 4.0, 25.0])
    def test_against_mpmath(self, n, x):
        expected = mp_lower_gamma(n + 1, x)
        assert regularized_lower_gamma(n + 1, x) == pytest.approx(expected, rel=1e-12, abs=1e-300)

    def test_far_tail_keeps_relative_precision(self):
        """Test tiny values right of the mean are not lost to cancellation"""
        expected = mp_lower_gamma(51, 1.0)
        assert expected < 1e-60
        assert regularized_lower_gamma(51, 1.0) == pytest.approx(expected, rel=1e-10)

    def test_order_one_closed_form(self):
        assert regularized_lower_gamma(1, 1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-14)

    def test_zero_argument(self):
        assert regularized_lower_gamma(3, 0.0) == 0.0

    def test_sequence_matches_scalar(self):
        values = regularized_lower_gamma_sequence(30, 4.0)
        assert values.shape == (31,)
        for n in (0, 3, 10, 30):
            assert values[n] == pytest.approx(regularized_lower_gamma(n + 1, 4.0), rel=1e-12, abs=1e-300)

    def test_sequence_is_decreasing(self):
        values = regularized_lower_gamma_sequence(60, 9.0)
        assert np.all(np.diff(values) <= 0)
        assert np.all(values >= 0) and np.all(values <= 1)

    @pytest.mark.parametrize("x", [0.25, 1.0, 4.0, 25.0])
    def test_sum_identity(self, x):
        """Test sum_n P(n+1, x) = x"""
        horizon = int(math.ceil(x + 20.0 * math.sqrt(x) + 60))
        total = float(np.sum(regularized_lower_gamma_sequence(horizon, x)))
        assert total == pytest.approx(x, rel=1e-10)

    @pytest.mark.parametrize("n_plus_1, x", [(0, 1.0), (1.5, 1.0), (2, -1.0), (2, float("nan"))])
    def test_domain(self, n_plus_1, x):
        with pytest.raises(DomainError):
            regularized_lower_gamma(n_plus_1, x)


class TestPoisson:
    """Test Poisson weights"""

    def test_pmf_log_domain(self):
        weight = log_poisson_pmf(3, 2.0)
        assert weight.weight == pytest.approx(2.0 ** 3 * math.exp(-2.0) / 6.0, rel=1e-14)

    def test_cdf_plus_survival(self):
        for n in (0, 2, 7):
            assert poisson_cdf(n, 3.0) + poisson_survival(n, 3.0) == pytest.approx(1.0, abs=1e-14)

    def test_invalid_mean(self):
        with pytest.raises(DomainError):
            log_poisson_pmf(1, 0.0)

    def test_pmf_far_tail_matches_extended_precision(self):
        with mpmath.workdps(250):
            expected = float(500 * mpmath.log(400) - 400 - mpmath.loggamma(501))
        assert log_poisson_pmf(500, 400.0).value == pytest.approx(expected, abs=1e-9)


class TestHermite:
    """Test the complex Hermite recurrence"""

    @pytest.mark.parametrize("x", [-1.7, 0.0, 0.3, 2.5])
    def test_real_argument_matches_scipy(self, x):
        values = hermite_sequence(15, x)
        expected = np.array([eval_hermite(n, x) for n in range(16)])
        np.testing.assert_allclose(values.real, expected, rtol=1e-10, atol=1e-12 * np.max(np.abs(expected)))
        assert np.all(values.imag == 0)

    @pytest.mark.parametrize("z", [0.4 + 0.9j, -1.2 + 0.3j, 2.0 - 1.5j])
    def test_complex_argument_matches_mpmath(self, z):
        for n in (1, 4, 11, 20):
            expected = complex(mpmath.hermite(n, mpmath.mpc(z)))
            assert hermite_complex(n, z) == pytest.approx(expected, rel=1e-10)

    def test_vectorized_shape(self):
        z = np.array([[0.1, 0.2j], [1.0, -1.0]])
        assert hermite_sequence(6, z).shape == (7, 2, 2)

    def test_overflow_guard(self):
        """Test the recurrence fails loudly instead of returning inf"""
        with pytest.raises(NumericalIntegrityError):
            hermite_sequence(200, 50.0 + 0j)

    def test_negative_degree(self):
        with pytest.raises(DomainError):
            hermite_sequence(-1, 0.5)


class TestLaguerre:
    """Test the Laguerre recurrence"""

    @pytest.mark.parametrize("x", [0.0, 0.5, 4.0, 30.0])
    def test_matches_scipy(self, x):
        values = laguerre_sequence(25, x)
        expected = np.array([eval_laguerre(n, x) for n in range(26)])
        np.testing.assert_allclose(values, expected, rtol=1e-9, atol=1e-11 * np.max(np.abs(expected)))

    def test_value_at_zero_is_one(self):
        assert laguerre(12, 0.0) == pytest.approx(1.0)

    def test_orthogonality(self):
        """Test int_0^inf e^{-x} L_m L_n dx = delta_mn by Gauss-Laguerre quadrature"""
        x, w = laggauss(20)
        values = laguerre_sequence(5, x)
        gram = (values * w[None, :]) @ values.T
        np.testing.assert_allclose(gram, np.eye(6), atol=1e-12)
