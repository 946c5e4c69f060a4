"""Tests for posterior summaries and convergence diagnostics."""

import math

import numpy as np
import pytest

from core.exceptions import InvalidArgumentError
from numerics.diagnostics import (
    effective_sample_size,
    split_rhat,
    summarize_draws,
    summarize_parameter,
)


def ar1(rng, phi, n_chains, n):
    x = np.zeros((n_chains, n))
    x[:, 0] = rng.standard_normal(n_chains) / math.sqrt(1 - phi**2)
    for i in range(1, n):
        x[:, i] = phi * x[:, i - 1] + rng.standard_normal(n_chains)
    return x


class TestEffectiveSampleSize:
    """Tests for the autocorrelation-based ESS."""

    def test_independent_draws(self, rng):
        """Test that white noise has ESS close to the draw count."""
        ess = effective_sample_size(rng.standard_normal((4, 1000)))
        assert 3000 < ess < 5500

    def test_autocorrelated_draws(self, rng):
        """Test ESS of an AR(1) chain against N (1 - phi) / (1 + phi)."""
        ess = effective_sample_size(ar1(rng, 0.9, 4, 5000))
        expected = 20000 * 0.1 / 1.9
        assert 0.6 * expected < ess < 1.5 * expected

    def test_constant_draws(self):
        """Test that constant draws have no ESS."""
        assert math.isnan(effective_sample_size(np.ones((2, 100))))

    def test_too_short(self):
        """Test that very short chains have no ESS."""
        assert math.isnan(effective_sample_size(np.array([[0.1, 0.2, 0.3]])))


class TestSplitRhat:
    """Tests for the potential scale reduction factor."""

    def test_mixed_chains(self, rng):
        """Test that chains from one distribution give R-hat near 1."""
        assert split_rhat(rng.standard_normal((4, 1000))) < 1.01

    def test_separated_chains(self, rng):
        """Test that chains with different means give a large R-hat."""
        chains = rng.standard_normal((2, 500)) + np.array([[0.0], [3.0]])
        assert split_rhat(chains) > 1.5

    def test_trending_chain(self):
        """Test that splitting exposes a drifting single chain."""
        chains = np.linspace(0, 10, 400).reshape(2, 200)
        assert split_rhat(chains) > 1.5

    def test_single_chain(self, rng):
        """Test that R-hat needs at least two chains."""
        assert math.isnan(split_rhat(rng.standard_normal((1, 100))))


class TestSummaries:
    """Tests for parameter and draw-table summaries."""

    def test_interval_and_coverage(self, rng):
        """Test the central 95% interval and truth coverage."""
        draws = rng.standard_normal((1, 4000))
        inside = summarize_parameter("beta1", draws, truth=0.0)
        outside = summarize_parameter("beta1", draws, truth=5.0)

        assert inside.lower == pytest.approx(-1.96, abs=0.15)
        assert inside.upper == pytest.approx(1.96, abs=0.15)
        assert inside.covered is True
        assert outside.covered is False
        assert inside.rhat is None

    def test_summarize_draws(self, rng):
        """Test coverage flags over several columns with chain ids."""
        draws = {"a": rng.normal(1.0, 0.1, 400), "b": rng.normal(-2.0, 0.1, 400)}
        chains = np.repeat([0, 1], 200)
        report = summarize_draws(draws, truth={"a": 1.0, "b": 0.0}, chain_ids=chains)

        assert report.n_draws == 400
        assert report.truth_provided
        assert [p.covered for p in report.parameters] == [True, False]
        assert report.all_covered is False
        assert report.parameters[0].rhat is not None

    def test_without_truth(self, rng):
        """Test that coverage is absent without true values."""
        report = summarize_draws({"a": rng.standard_normal(50)})
        assert not report.truth_provided
        assert report.all_covered is None
        assert report.parameters[0].covered is None

    def test_empty(self):
        """Test rejection of empty tables."""
        with pytest.raises(InvalidArgumentError):
            summarize_draws({})
        with pytest.raises(InvalidArgumentError):
            summarize_draws({"a": np.zeros(0)})
