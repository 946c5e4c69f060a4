"""Tests for the reverse- and forward-mode differentiation engine."""

import numpy as np
import pytest
from scipy import stats

from core.exceptions import FactorizationError, NonFiniteError
from numerics import autodiff as ad


_MIX = np.random.default_rng(2718).standard_normal((3, 4))
_COV = np.array([[1.5, 0.3], [0.3, 0.8]])


def _composite(x):
    hidden = ad.tanh(_MIX @ x + 0.1)
    return ad.sum_(ad.sqrt(1.0 + hidden**2) / (2.0 + ad.sigmoid(x[:3])))


OBJECTIVES = {
    "tanh": lambda x: ad.sum_(ad.tanh(_MIX @ x) * x[:3]),
    "exp": lambda x: ad.sum_(ad.exp(0.5 * x)) * x[0],
    "log": lambda x: ad.sum_(ad.log(1.0 + x**2)),
    "sigmoid": lambda x: ad.sum_(ad.sigmoid(_MIX @ x) ** 2),
    "softplus": lambda x: ad.sum_(ad.softplus(x) * x),
    "indexing": lambda x: ad.sum_(x[np.array([0, 0, 3])] * x[1:4]) + x[2] ** 3,
    "matmul": lambda x: (_MIX @ x) @ (_MIX @ x) + x @ x[np.array([3, 2, 1, 0])],
    "gaussian_logpdf": lambda x: ad.gaussian_logpdf(ad.reshape(x, (2, 2)), _COV + x[0] ** 2 * np.eye(2)),
    "difference_quotient": lambda x: ad.sum_((x[1:] - x[:-1]) / (1.5 + ad.tanh(x[:-1]))),
    "composite": _composite,
}


def _ridge(s, t, p):
    return ad.tanh(s * p[0] + t * p[1] + p[2])


class TestReverseMode:
    """Tests for tape recording and backward sweeps."""

    def test_polynomial_gradient(self):
        """Test the gradient of a sum of squares."""
        x = np.array([1.0, -2.0, 0.5])
        value, g = ad.value_and_grad(lambda v: (v**2).sum(), x)

        assert value == pytest.approx(5.25)
        np.testing.assert_allclose(g, 2 * x)

    def test_matches_finite_differences(self, rng):
        """Test a composite objective against central differences."""
        A = rng.standard_normal((4, 3))
        b = rng.standard_normal(4)

        def objective(x):
            r = A @ x - b
            return ad.sum_(ad.softplus(r) * ad.sigmoid(r)) + ad.log(1.0 + ad.exp(x[0]))

        x0 = rng.standard_normal(3)
        g = ad.grad(objective, x0)
        fd = ad.finite_difference_gradient(lambda x: ad.value_of(objective(x)), x0)
        np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-8)

    def test_jacobian_of_linear_map(self, rng):
        """Test that the Jacobian of A x is A."""
        A = rng.standard_normal((5, 3))
        np.testing.assert_allclose(ad.jacobian(lambda x: A @ x, np.ones(3)), A)

    def test_quad_form(self, rng):
        """Test value and gradient of x^T P x."""
        B = rng.standard_normal((3, 3))
        P = B @ B.T + np.eye(3)
        x = rng.standard_normal(3)
        value, g = ad.value_and_grad(lambda v: ad.quad_form(v, P), x)

        assert value == pytest.approx(x @ P @ x)
        np.testing.assert_allclose(g, 2 * P @ x)

    def test_fancy_index_accumulates(self):
        """Test that repeated integer indices sum their adjoints."""
        g = ad.grad(lambda v: v[np.array([0, 0, 2])].sum(), np.zeros(3))
        np.testing.assert_allclose(g, [2.0, 0.0, 1.0])

    def test_non_finite_input(self):
        """Test that non-finite parameters are rejected with their index."""
        with pytest.raises(NonFiniteError) as exc_info:
            ad.value_and_grad(lambda v: v.sum(), np.array([0.0, np.nan]))
        assert exc_info.value.index == 1
        assert exc_info.value.exit_code == 2

    def test_constant_objective_has_zero_gradient(self):
        """Test objectives that do not touch the input."""
        value, g = ad.value_and_grad(lambda v: np.array(3.0), np.ones(2))
        assert value == 3.0
        np.testing.assert_array_equal(g, np.zeros(2))


class TestGradientSuite:
    """Tests for reverse-mode gradients over seeded random points."""

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("name", sorted(OBJECTIVES))
    def test_matches_finite_differences(self, name, seed):
        """Test each objective against central differences at rel. tol 1e-5."""
        objective = OBJECTIVES[name]
        x0 = np.random.default_rng(seed).standard_normal(4)

        g = ad.grad(objective, x0)
        fd = ad.finite_difference_gradient(lambda x: ad.value_of(objective(x)), x0)
        np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-8)


class TestGaussianLogpdf:
    """Tests for the Gaussian log-density primitive."""

    def test_value_matches_scipy(self, rng):
        """Test the summed log-density against scipy."""
        B = rng.standard_normal((3, 3))
        cov = B @ B.T + np.eye(3)
        residuals = rng.standard_normal((4, 3))

        value = ad.gaussian_logpdf(residuals, cov)
        expected = stats.multivariate_normal(np.zeros(3), cov).logpdf(residuals).sum()
        assert float(value) == pytest.approx(expected, rel=1e-12)

    def test_covariance_adjoint(self, rng):
        """Test the covariance adjoint along a symmetric direction."""
        B = rng.standard_normal((3, 3))
        cov = B @ B.T + np.eye(3)
        residuals = rng.standard_normal((2, 3))
        D = rng.standard_normal((3, 3))
        D = D + D.T

        tape = ad.Tape()
        c = tape.var(cov)
        G = tape.gradient(ad.gaussian_logpdf(residuals, c), c)

        h = 1e-6
        plus = float(ad.gaussian_logpdf(residuals, cov + h * D))
        minus = float(ad.gaussian_logpdf(residuals, cov - h * D))
        assert np.sum(G * D) == pytest.approx((plus - minus) / (2 * h), rel=1e-5)

    def test_indefinite_covariance(self):
        """Test that a non-positive-definite covariance raises."""
        with pytest.raises(FactorizationError):
            ad.gaussian_logpdf(np.zeros((1, 2)), np.array([[1.0, 2.0], [2.0, 1.0]]), time_index=3)


class TestInputDerivatives:
    """Tests for second-order forward mode through a network-like map."""

    def test_matches_closed_form(self):
        """Test u, u_t, u_s and u_ss of tanh(a s + b t + c)."""
        p = np.array([0.7, -1.3, 0.2])
        s = np.linspace(-1.0, 1.0, 5)
        t = np.full(5, 0.4)
        u, u_t, u_s, u_ss = ad.input_derivs(_ridge, s, t, p)

        y = np.tanh(p[0] * s + p[1] * t + p[2])
        sech2 = 1 - y**2
        np.testing.assert_allclose(ad.value_of(u), y)
        np.testing.assert_allclose(ad.value_of(u_t), p[1] * sech2)
        np.testing.assert_allclose(ad.value_of(u_s), p[0] * sech2)
        np.testing.assert_allclose(ad.value_of(u_ss), -2 * y * sech2 * p[0] ** 2)

    def test_parameter_gradient_through_second_derivative(self, rng):
        """Test gradients of u_ss and u_t with respect to parameters."""
        s = rng.uniform(-1, 1, 6)
        t = rng.uniform(0, 1, 6)

        def objective(p):
            _, u_t, _, u_ss = ad.input_derivs(_ridge, s, t, p)
            return ad.sum_(u_ss * u_ss) + ad.sum_(u_t)

        p0 = np.array([0.9, 0.4, -0.3])
        g = ad.grad(objective, p0)
        fd = ad.finite_difference_gradient(lambda p: ad.value_of(objective(p)), p0)
        np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-9)
