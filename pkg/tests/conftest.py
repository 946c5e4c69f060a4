"""Pytest configuration and fixtures."""

import math
from pathlib import Path

import numpy as np
import pytest

from main import main
from models.grid import build_grid
from schema.network import NeuralNetSpec
from schema.run import RunConfig


TOY_CONFIG_TOML = """
[experiment]
name = "toy"
seed = 7

[grid]
n = 9
T = 5
t_max = 1.0

[solver]
n_internal = 64
dt_internal = 0.002

[model]
initial_lambda = 0.2

[model.network]
hidden_layers = 1
hidden_width = 4
t_scale = 1.0

[sampler]
n_warmup = 20
n_samples = 10
max_tree_depth = 4

[baseline]
max_iter = 30
gtol = 1e-5
coarse_dt = 0.05

[pnm]
n_collocation = 10
n_query = 21
"""


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_grid():
    """9 x 5 grid on [-pi, pi] x [0, 1]."""
    return build_grid(9, 5, -math.pi, math.pi, 1.0)


@pytest.fixture
def toy_network():
    """Single hidden layer of four tanh units."""
    return NeuralNetSpec(hidden_layers=1, hidden_width=4, t_scale=1.0)


@pytest.fixture
def toy_config_file(tmp_path) -> Path:
    """TOML run configuration for a fast end-to-end run."""
    path = tmp_path / "toy.toml"
    path.write_text(TOY_CONFIG_TOML, encoding="utf-8")
    return path


@pytest.fixture
def toy_config(toy_config_file, tmp_path) -> RunConfig:
    """The toy configuration with its output directory inside tmp_path."""
    from core.config import load_run_config

    return load_run_config(toy_config_file, output_dir=tmp_path / "out")


@pytest.fixture
def cli(toy_config_file, tmp_path):
    """Run the CLI with the toy config and a tmp output directory; returns the exit code."""
    out = tmp_path / "out"

    def run(*args: str, out_dir: Path | None = None) -> int:
        return main(["--config", str(toy_config_file), "--out", str(out_dir or out), *args])

    run.out = out  # type: ignore[attr-defined]
    return run


@pytest.fixture
def toy_truth(toy_config):
    """One simulated realization on the toy grid."""
    from models.simulation import simulate

    return simulate(toy_config)


@pytest.fixture
def toy_data(toy_truth, toy_config):
    """Model data built from the toy realization."""
    from models.bpinn import ModelData

    return ModelData.build(
        toy_truth.observations, toy_truth.covariate_array(), toy_config.model.collocation
    )
