"""Helpers shared by the subcommands."""

import argparse
from pathlib import Path

import numpy as np

from core.config import load_run_config
from schema.run import RunConfig


def load_config(args: argparse.Namespace) -> RunConfig:
    """Run configuration with the global --seed / --out overrides applied."""
    return load_run_config(args.config, seed=args.seed, output_dir=args.out)


def output_dir(config: RunConfig) -> Path:
    return Path(config.experiment.output_dir)


def input_path(value: str | Path | None, config: RunConfig, default_name: str) -> Path:
    """An explicit path, or ``default_name`` inside the output directory."""
    return Path(value) if value is not None else output_dir(config) / default_name


def rmse(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if mask is not None:
        diff = diff[np.asarray(mask, dtype=bool)]
    return float(np.sqrt(np.mean(diff**2))) if diff.size else float("nan")
