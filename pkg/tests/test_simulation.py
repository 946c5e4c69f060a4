"""Tests for synthetic data generation."""

import numpy as np

from models.simulation import burgers_config, simulate


class TestSimulate:
    """Tests for the data-generating pipeline."""

    def test_decomposition(self, toy_truth):
        """Test u_true = mu + u_tilde + nu and mu = X beta."""
        np.testing.assert_allclose(
            toy_truth.u_true.values,
            toy_truth.mu.values + toy_truth.u_tilde.values + toy_truth.nu.values,
        )
        np.testing.assert_allclose(
            toy_truth.mu.values, toy_truth.covariate_array() @ toy_truth.beta_true
        )

    def test_shapes(self, toy_truth):
        """Test that every field lives on the 9 x 5 grid."""
        assert toy_truth.grid.shape == (5, 9)
        assert toy_truth.covariate_array().shape == (5, 9, 2)
        for field in (toy_truth.u_true, toy_truth.u_tilde, toy_truth.mu, toy_truth.nu):
            assert field.values.shape == (5, 9)

    def test_observation_pattern(self, toy_truth):
        """Test the missing columns and NaN placement in z."""
        obs = toy_truth.observations
        # floor(0.5 * 9) = 4 missing columns at every time
        assert obs.mask.sum() == 5 * 5
        assert (obs.mask == obs.mask[0]).all()
        assert np.isnan(obs.values[~obs.mask]).all()
        assert np.isfinite(obs.values[obs.mask]).all()

    def test_deterministic(self, toy_config):
        """Test that the same seed reproduces every component."""
        a = simulate(toy_config)
        b = simulate(toy_config)
        np.testing.assert_array_equal(a.u_true.values, b.u_true.values)
        np.testing.assert_array_equal(a.observations.mask, b.observations.mask)

    def test_seed_override(self, toy_config):
        """Test that a different seed changes the realization."""
        a = simulate(toy_config)
        b = simulate(toy_config, seed=8)
        assert b.seed == 8
        assert not np.allclose(a.covariates[0].values, b.covariates[0].values)

    def test_streams_are_independent(self, toy_config, toy_truth):
        """Test that changing the noise level leaves the other draws untouched."""
        quiet = toy_config.model_copy(
            update={"simulation": toy_config.simulation.model_copy(update={"noise_std": 0.0})}
        )
        truth = simulate(quiet)

        np.testing.assert_array_equal(truth.nu.values, toy_truth.nu.values)
        np.testing.assert_array_equal(truth.mu.values, toy_truth.mu.values)
        mask = truth.observations.mask
        np.testing.assert_array_equal(truth.observations.values[mask], truth.u_true.values[mask])

    def test_parameters(self, toy_truth):
        """Test the generative values keyed by posterior column name."""
        params = toy_truth.parameters()
        assert params == {
            "beta1": 0.3,
            "beta2": -0.2,
            "lambda": 0.1,
            "sigma_d": 0.2,
            "sigma2_nu": 0.05,
            "ell_nu": 0.15,
        }

    def test_burgers_config(self, toy_config):
        """Test the solver configuration implied by a run configuration."""
        cfg = burgers_config(toy_config)
        assert cfg.lam == 0.1
        assert cfg.n_internal == 64
        assert cfg.dt_internal == 0.002

    def test_noise_free_complete_observations(self, toy_config):
        """Test that without noise or missing columns z equals u_true everywhere."""
        exact = toy_config.model_copy(
            update={
                "simulation": toy_config.simulation.model_copy(
                    update={"noise_std": 0.0, "missing_fraction": 0.0}
                )
            }
        )
        truth = simulate(exact)

        assert truth.observations.fully_observed
        np.testing.assert_array_equal(truth.observations.values, truth.u_true.values)
