"""End-to-end tests for the command-line interface."""

import json

import pandas as pd
import pytest

from commands.baseline import MODES
from core.exceptions import EXIT_OK, EXIT_USER_ERROR
from main import main
from storage.artifacts import write_draws_csv


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture
def simulated(cli):
    """Output directory holding one toy simulation."""
    assert cli("simulate") == EXIT_OK
    return cli.out


class TestSimulate:
    """Tests for the simulate command."""

    def test_writes_artifacts(self, simulated):
        """Test the three simulation files and their sizes."""
        truth = pd.read_csv(simulated / "truth.csv")
        obs = pd.read_csv(simulated / "obs.csv")
        metadata = read_json(simulated / "truth.json")

        assert len(truth) == 9 * 5
        assert list(truth.columns) == ["t", "s", "u_true", "u_tilde", "mu", "nu", "x1", "x2"]
        assert list(obs.columns) == ["t", "s", "z", "observed"]
        assert obs["observed"].sum() == metadata["n_observed"] == 5 * 5
        assert obs.loc[obs["observed"] == 0, "z"].isna().all()
        assert metadata["seed"] == 7
        assert metadata["parameters"]["lambda"] == pytest.approx(0.1)

    def test_reproducible(self, cli, tmp_path):
        """Test that a rerun with the same seed writes identical files."""
        assert cli("simulate", out_dir=tmp_path / "a") == EXIT_OK
        assert cli("simulate", out_dir=tmp_path / "b") == EXIT_OK

        for name in ("truth.csv", "obs.csv", "truth.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_override(self, cli, tmp_path):
        """Test that --seed changes the realization."""
        assert cli("simulate", out_dir=tmp_path / "a") == EXIT_OK
        assert main(["--seed", "8", "--out", str(tmp_path / "b"), "--config", str(tmp_path / "toy.toml"), "simulate"]) == EXIT_OK

        assert read_json(tmp_path / "b" / "truth.json")["seed"] == 8
        assert (tmp_path / "a" / "obs.csv").read_bytes() != (tmp_path / "b" / "obs.csv").read_bytes()


class TestFitPipeline:
    """Tests for fit, summarize and predict on the toy problem."""

    def test_fit_summarize_predict(self, cli, simulated):
        """Test the full posterior pipeline from simulated data."""
        assert cli("fit") == EXIT_OK
        draws = pd.read_csv(simulated / "draws.csv")
        assert len(draws) == 10
        assert list(draws.columns[:8]) == ["chain", "draw", "beta1", "beta2", "lambda", "sigma_d", "sigma2_nu", "ell_nu"]
        assert (draws["lambda"] > 0).all()
        diagnostics = read_json(simulated / "diagnostics.json")
        assert diagnostics["n_draws"] == 10
        assert 0.0 <= diagnostics["acceptance_rate"] <= 1.0

        assert cli("summarize", "--truth", str(simulated / "truth.json")) == EXIT_OK
        summary = read_json(simulated / "summary.json")
        assert summary["truth_provided"]
        assert [p["name"] for p in summary["parameters"]][:2] == ["beta1", "beta2"]
        coverage = pd.read_csv(simulated / "coverage.csv")
        assert {"parameter", "mean", "lower", "upper", "truth", "covered"} <= set(coverage.columns)

        assert cli("predict") == EXIT_OK
        for name in ("u_nn_mean", "nu_mean", "u_total_mean", "u_total_std"):
            field = pd.read_csv(simulated / f"{name}.csv")
            assert len(field) == 45
            assert field["value"].notna().all()
        assert (pd.read_csv(simulated / "u_total_std.csv")["value"] >= 0).all()

    def test_fit_reproducible(self, cli, tmp_path):
        """Test that two fits of the same simulation write identical files."""
        for run in ("a", "b"):
            assert cli("simulate", out_dir=tmp_path / run) == EXIT_OK
            assert cli("fit", out_dir=tmp_path / run) == EXIT_OK

        for name in ("draws.csv", "diagnostics.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_summarize_without_truth(self, cli, tmp_path):
        """Test that coverage columns are omitted without --truth."""
        draws = tmp_path / "draws.csv"
        write_draws_csv(draws, [{"a": float(i)} for i in range(8)], [0] * 8, ["a"])

        assert cli("summarize", "--draws", str(draws)) == EXIT_OK
        summary = read_json(cli.out / "summary.json")
        assert not summary["truth_provided"]
        assert summary["all_covered"] is None
        assert "covered" not in pd.read_csv(cli.out / "coverage.csv").columns

    def test_predict_without_draws(self, cli, simulated, tmp_path):
        """Test that an empty draws table is a user error."""
        draws = tmp_path / "empty.csv"
        write_draws_csv(draws, [], [], ["beta1"])
        assert cli("predict", "--draws", str(draws)) == EXIT_USER_ERROR
        assert not (simulated / "u_total_mean.csv").exists()

    def test_predict_rejects_bad_thin(self, cli, simulated, tmp_path):
        """Test that thinning must be positive."""
        draws = tmp_path / "d.csv"
        write_draws_csv(draws, [{"beta1": 0.0}], [0], ["beta1"])
        assert cli("predict", "--draws", str(draws), "--thin", "0") == EXIT_USER_ERROR


class TestBaseline:
    """Tests for the assimilation baselines."""

    @pytest.mark.parametrize("mode", MODES)
    def test_modes(self, cli, simulated, mode):
        """Test that every mode writes an analysis and a report."""
        assert cli("baseline", "--mode", mode) == EXIT_OK

        analysis = pd.read_csv(simulated / f"analysis_{mode}.csv")
        report = read_json(simulated / f"baseline_{mode}.json")
        assert len(analysis) == 45
        assert analysis["value"].notna().all()
        assert report["mode"] == mode
        assert report["rmse_vs_truth"] is not None
        assert report["rmse_vs_observations"] >= 0
        if mode.startswith("4dvar"):
            assert report["n_iterations"] >= 1


class TestPnmDemo:
    """Tests for the Poisson demonstration."""

    def test_writes_posterior(self, cli):
        """Test the posterior table and summary."""
        assert cli("pnm-demo") == EXIT_OK

        posterior = pd.read_csv(cli.out / "pnm_posterior.csv")
        summary = read_json(cli.out / "pnm_summary.json")
        assert list(posterior.columns) == ["s", "mean", "std"]
        assert len(posterior) == 21
        assert summary["n_collocation"] == 10
        assert summary["max_abs_error"] < 1e-2


class TestErrors:
    """Tests for exit codes on failure."""

    def test_missing_observations(self, cli, tmp_path):
        """Test that a missing input file exits with the user-error code."""
        assert cli("fit", "--obs", str(tmp_path / "missing.csv")) == EXIT_USER_ERROR
        assert not cli.out.exists()

    def test_missing_config(self, tmp_path):
        """Test that a missing config file is a user error."""
        assert main(["--config", str(tmp_path / "nope.toml"), "pnm-demo"]) == EXIT_USER_ERROR

    def test_invalid_config(self, tmp_path):
        """Test that unknown keys are rejected."""
        path = tmp_path / "bad.toml"
        path.write_text("[grid]\nsize = 3\n", encoding="utf-8")
        assert main(["--config", str(path), "--out", str(tmp_path / "out"), "pnm-demo"]) == EXIT_USER_ERROR

    def test_bad_arguments(self, cli):
        """Test that argument errors exit with the user-error code."""
        with pytest.raises(SystemExit) as exc_info:
            cli("baseline", "--mode", "3dvar")
        assert exc_info.value.code == EXIT_USER_ERROR

    def test_missing_subcommand(self):
        """Test that a subcommand is required."""
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == EXIT_USER_ERROR


@pytest.mark.slow
class TestReferenceStudy:
    """Acceptance checks on the default configuration."""

    def test_default_simulation(self, tmp_path):
        """Test the reference grid and missingness pattern."""
        assert main(["--out", str(tmp_path), "simulate"]) == EXIT_OK

        obs = pd.read_csv(tmp_path / "obs.csv")
        metadata = read_json(tmp_path / "truth.json")
        assert len(obs) == 51 * 25
        assert metadata["n_observed"] == 26 * 25
        assert metadata["seed"] == 2023
        assert metadata["grid"]["t_max"] == 5.0
