"""Tests for OI, 3DVar, Kalman filtering/smoothing and 4DVar."""

import math

import numpy as np
import pytest
from scipy import stats

from core.exceptions import InvalidArgumentError
from numerics import autodiff as ad
from numerics.assimilation import (
    background_covariance,
    kalman_filter,
    kalman_smoother,
    linearize_model,
    optimal_interpolation,
    var3d_objective,
    var4d,
)
from schema.assimilation import AssimConfig, ObservationStep
from schema.kernel import KernelSpec


@pytest.fixture
def background(rng):
    B = rng.standard_normal((4, 4))
    return rng.standard_normal(4), B @ B.T + np.eye(4)


@pytest.fixture
def linear_system(rng):
    """Five-state linear dynamics observed at three times."""
    n, T = 5, 3
    A = 0.9 * np.eye(n) + 0.05 * rng.standard_normal((n, n))
    C_b = 0.5 * np.eye(n) + 0.1 * np.ones((n, n))
    u_b = rng.standard_normal(n)
    steps = []
    for _ in range(T):
        H = np.eye(n)[[0, 2, 4]] + 0.1 * rng.standard_normal((3, n))
        steps.append(ObservationStep(z=rng.standard_normal(3), H=H, R=0.2 * np.eye(3)))
    return A, C_b, u_b, steps


class TestOptimalInterpolation:
    """Tests for the BLUE analysis."""

    def test_matches_explicit_gain(self, background, rng):
        """Test against the textbook gain with explicit inverses."""
        u_b, C_b = background
        H = rng.standard_normal((2, 4))
        R = np.diag([0.3, 0.5])
        z = rng.standard_normal(2)

        K = C_b @ H.T @ np.linalg.inv(H @ C_b @ H.T + R)
        np.testing.assert_allclose(optimal_interpolation(u_b, C_b, H, R, z), u_b + K @ (z - H @ u_b))

    def test_noise_limits(self, background, rng):
        """Test that huge R returns the background and tiny R fits the data."""
        u_b, C_b = background
        z = rng.standard_normal(4)

        np.testing.assert_allclose(optimal_interpolation(u_b, C_b, np.eye(4), 1e12 * np.eye(4), z), u_b, atol=1e-9)
        np.testing.assert_allclose(optimal_interpolation(u_b, C_b, np.eye(4), 1e-12 * np.eye(4), z), z, atol=1e-9)

    def test_no_observations(self, background):
        """Test that an empty observation vector returns the background."""
        u_b, C_b = background
        out = optimal_interpolation(u_b, C_b, np.zeros((0, 4)), np.zeros((0, 0)), np.zeros(0))
        np.testing.assert_array_equal(out, u_b)
        assert out is not u_b

    def test_shape_mismatch(self, background):
        """Test rejection of inconsistent shapes."""
        u_b, C_b = background
        with pytest.raises(InvalidArgumentError):
            optimal_interpolation(u_b, C_b, np.eye(3), np.eye(3), np.zeros(3))

    def test_3dvar_is_stationary_at_oi(self, background, rng):
        """Test that the 3DVar gradient vanishes at the OI analysis."""
        u_b, C_b = background
        H = rng.standard_normal((3, 4))
        R = 0.4 * np.eye(3)
        z = rng.standard_normal(3)
        analysis = optimal_interpolation(u_b, C_b, H, R, z)

        _, g = var3d_objective(analysis, u_b, C_b, H, R, z)
        np.testing.assert_allclose(g, 0.0, atol=1e-10)

    def test_3dvar_gradient(self, background, rng):
        """Test the 3DVar gradient against finite differences."""
        u_b, C_b = background
        H = rng.standard_normal((3, 4))
        R = 0.4 * np.eye(3)
        z = rng.standard_normal(3)
        u = rng.standard_normal(4)

        _, g = var3d_objective(u, u_b, C_b, H, R, z)
        fd = ad.finite_difference_gradient(lambda v: var3d_objective(v, u_b, C_b, H, R, z)[0], u)
        np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-8)

    def test_background_covariance_factorizes(self):
        """Test that the jittered background covariance is positive definite."""
        s = np.linspace(-math.pi, math.pi, 51)
        C_b = background_covariance(s, KernelSpec.squared_exponential(0.1, 0.3))
        np.linalg.cholesky(C_b)
        np.testing.assert_array_equal(C_b, C_b.T)


class TestKalman:
    """Tests for the filter and RTS smoother."""

    def test_prediction_only(self):
        """Test moment propagation without observations."""
        A = np.array([[0.5]])
        result = kalman_filter([None, None, None], A, np.array([[0.1]]), np.array([2.0]), np.array([[1.0]]))

        np.testing.assert_allclose(result.filtered_means[:, 0], [2.0, 1.0, 0.5])
        np.testing.assert_allclose(result.filtered_covs[:, 0, 0], [1.0, 0.35, 0.1875])
        assert result.log_likelihood == 0.0

    def test_static_state_variance(self):
        """Test 1 / (1/s0^2 + k/s^2) for repeated observation of a constant."""
        sigma0, sigma = 2.0, 0.5
        steps = [ObservationStep(z=[1.0], H=[[1.0]], R=[[sigma**2]]) for _ in range(4)]
        result = kalman_filter(steps, np.eye(1), np.zeros((1, 1)), np.zeros(1), np.array([[sigma0**2]]))

        for k in range(4):
            expected = 1.0 / (1.0 / sigma0**2 + (k + 1) / sigma**2)
            assert result.filtered_covs[k, 0, 0] == pytest.approx(expected, rel=1e-8)

    def test_joint_gaussian_oracle(self, rng):
        """Test the final mean and log-likelihood against the batch posterior."""
        sigma0, sigma, m0 = 1.5, 0.4, 0.3
        z = rng.standard_normal(3)
        steps = [ObservationStep(z=[v], H=[[1.0]], R=[[sigma**2]]) for v in z]
        result = kalman_filter(steps, np.eye(1), np.zeros((1, 1)), np.array([m0]), np.array([[sigma0**2]]))

        precision = 1.0 / sigma0**2 + 3 / sigma**2
        mean = (m0 / sigma0**2 + z.sum() / sigma**2) / precision
        assert result.filtered_means[-1, 0] == pytest.approx(mean, rel=1e-10)

        cov = sigma0**2 * np.ones((3, 3)) + sigma**2 * np.eye(3)
        expected = stats.multivariate_normal(np.full(3, m0), cov).logpdf(z)
        assert result.log_likelihood == pytest.approx(expected, rel=1e-10)

    def test_smoother_ends_at_filter(self, linear_system):
        """Test that the smoothed and filtered moments agree at the last time."""
        A, C_b, u_b, steps = linear_system
        result = kalman_filter(steps, A, 0.01 * np.eye(5), u_b, C_b)
        smoothed = kalman_smoother(result)

        np.testing.assert_allclose(smoothed.means[-1], result.filtered_means[-1])
        assert np.all(np.diagonal(smoothed.covs, axis1=1, axis2=2) <= np.diagonal(result.filtered_covs, axis1=1, axis2=2) + 1e-12)

    def test_shape_checks(self):
        """Test rejection of mis-sized covariances and transitions."""
        with pytest.raises(InvalidArgumentError):
            kalman_filter([None], np.eye(2), np.eye(2), np.zeros(2), np.eye(3))
        with pytest.raises(InvalidArgumentError):
            kalman_filter([None, None, None], np.zeros((1, 2, 2)), np.eye(2), np.zeros(2), np.eye(2))

    def test_linearize_linear_model(self, rng):
        """Test that linearizing an affine map recovers it."""
        A = rng.standard_normal((3, 3))
        c = rng.standard_normal(3)
        mats, offsets = linearize_model(lambda u: A @ u + c, [np.zeros(3), np.ones(3)])

        np.testing.assert_allclose(mats, [A, A])
        np.testing.assert_allclose(offsets, [c, c])


class TestVar4D:
    """Tests for strong- and weak-constraint 4DVar."""

    def test_strong_matches_smoother(self, linear_system):
        """Test that perfect-model 4DVar recovers the smoothed initial state."""
        A, C_b, u_b, steps = linear_system
        config = AssimConfig(u_b=u_b, C_b=C_b, max_iter=500)
        result = var4d(u_b, steps, config, lambda u: A @ u)

        smoothed = kalman_smoother(kalman_filter(steps, A, np.zeros((5, 5)), u_b, C_b))
        np.testing.assert_allclose(result.u0, smoothed.means[0], atol=1e-5)
        np.testing.assert_allclose(result.trajectory, smoothed.means, atol=1e-5)
        assert result.restarts == 0

    def test_weak_matches_smoother(self, linear_system):
        """Test that weak-constraint 4DVar recovers the smoothed trajectory."""
        A, C_b, u_b, steps = linear_system
        Q = 0.05 * np.eye(5)
        config = AssimConfig(u_b=u_b, C_b=C_b, Q=Q, max_iter=1000)
        result = var4d(u_b, steps, config, lambda u: A @ u, mode="weak")

        smoothed = kalman_smoother(kalman_filter(steps, A, Q, u_b, C_b))
        np.testing.assert_allclose(result.trajectory, smoothed.means, atol=1e-5)
        assert result.eta.shape == (2, 5)

    def test_objective_history_is_monotone(self, linear_system):
        """Test that recorded objective values never increase."""
        A, C_b, u_b, steps = linear_system
        config = AssimConfig(u_b=u_b, C_b=C_b)
        result = var4d(np.zeros(5), steps, config, lambda u: A @ u)

        assert len(result.objective_history) >= 2
        assert np.all(np.diff(result.objective_history) <= 1e-12)
        assert result.final_objective == pytest.approx(result.objective_history[-1])

    def test_no_observations(self, linear_system):
        """Test that an empty window returns the background."""
        A, C_b, u_b, _ = linear_system
        config = AssimConfig(u_b=u_b, C_b=C_b, Q=0.1 * np.eye(5))
        result = var4d(np.zeros(5), [None, None], config, lambda u: A @ u, mode="weak")

        np.testing.assert_array_equal(result.u0, u_b)
        np.testing.assert_array_equal(result.eta, np.zeros((1, 5)))
        np.testing.assert_allclose(result.trajectory[1], A @ u_b)
        assert result.n_iterations == 0

    def test_weak_needs_model_error(self, linear_system):
        """Test that weak mode requires Q."""
        A, C_b, u_b, steps = linear_system
        with pytest.raises(InvalidArgumentError):
            var4d(u_b, steps, AssimConfig(u_b=u_b, C_b=C_b), lambda u: A @ u, mode="weak")

    def test_unknown_mode(self, linear_system):
        """Test rejection of unknown modes."""
        A, C_b, u_b, steps = linear_system
        with pytest.raises(InvalidArgumentError):
            var4d(u_b, steps, AssimConfig(u_b=u_b, C_b=C_b), lambda u: A @ u, mode="hybrid")


class TestSchemas:
    """Tests for observation and configuration validation."""

    def test_rejects_indefinite_noise(self):
        """Test that R must be positive definite."""
        with pytest.raises(ValueError):
            ObservationStep(z=[0.0, 0.0], H=np.eye(2), R=[[1.0, 2.0], [2.0, 1.0]])

    def test_rejects_shape_mismatch(self):
        """Test that C_b must match the state size."""
        with pytest.raises(ValueError):
            AssimConfig(u_b=np.zeros(3), C_b=np.eye(2))
