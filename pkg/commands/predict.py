"""`predict`: posterior mean and spread of the latent fields over the grid."""

import argparse
import logging
from pathlib import Path

import numpy as np

from commands.base import input_path, load_config, output_dir
from core.exceptions import EXIT_OK, InvalidArgumentError
from models.bpinn import ParameterLayout, ParameterVector, predict
from models.grid import Field
from schema.network import NeuralNetSpec
from storage.artifacts import (
    DRAWS_CSV,
    OBS_CSV,
    TRUTH_CSV,
    read_covariates,
    read_draws_csv,
    read_observations,
    staged_output,
    write_fields_csv,
)

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "predict",
        help="posterior mean fields from saved draws",
        description=(
            "Writes u_nn_mean.csv, nu_mean.csv, u_total_mean.csv and u_total_std.csv "
            "to the output directory."
        ),
    )
    parser.add_argument("--draws", help="draws CSV (default: <out>/draws.csv)")
    parser.add_argument("--obs", help="observation CSV (default: <out>/obs.csv)")
    parser.add_argument("--covariates", help="CSV with x1,x2 columns (default: truth.csv next to --obs)")
    parser.add_argument("--thin", type=int, help="use every k-th draw (default: predict.thin)")
    parser.set_defaults(handler=cmd_predict)


def posterior_fields(
    rows: list[ParameterVector],
    observations: Field,
    covariates: np.ndarray,
    spec: NeuralNetSpec,
) -> dict[str, np.ndarray]:
    """Means over draws; the total variance adds the spread of means to the mean GP variance."""
    if not rows:
        raise InvalidArgumentError("no posterior draws to predict from")
    shape = observations.grid.shape
    sums = {name: np.zeros(shape) for name in ("u_nn", "nu", "u_total", "u_total_sq", "nu_var")}
    for params in rows:
        p = predict(params, observations, covariates, spec)
        total = p.u_total
        sums["u_nn"] += p.u_nn
        sums["nu"] += p.nu_mean
        sums["u_total"] += total
        sums["u_total_sq"] += total**2
        sums["nu_var"] += p.nu_var

    n = len(rows)
    mean_total = sums["u_total"] / n
    spread = np.clip(sums["u_total_sq"] / n - mean_total**2, 0.0, None)
    return {
        "u_nn_mean": sums["u_nn"] / n,
        "nu_mean": sums["nu"] / n,
        "u_total_mean": mean_total,
        "u_total_std": np.sqrt(spread + sums["nu_var"] / n),
    }


def cmd_predict(args: argparse.Namespace) -> int:
    config = load_config(args)
    obs_path = input_path(args.obs, config, OBS_CSV)
    covariates_path = Path(args.covariates) if args.covariates else obs_path.parent / TRUTH_CSV
    observations = read_observations(obs_path)
    grid, X = read_covariates(covariates_path)
    if not grid.same_as(observations.grid):
        raise InvalidArgumentError("covariate grid differs from the observation grid")

    thin = config.predict.thin if args.thin is None else args.thin
    if thin < 1:
        raise InvalidArgumentError(f"--thin must be at least 1, got {thin}")

    layout = ParameterLayout.from_settings(config.model)
    frame = read_draws_csv(input_path(args.draws, config, DRAWS_CSV), layout.scalar_names + layout.weight_names)
    records = frame.iloc[::thin].to_dict(orient="records")
    rows = [ParameterVector.from_row(record, layout) for record in records]
    logger.info("Predicting from %d of %d draws (thin=%d)", len(rows), len(frame), thin)

    fields = posterior_fields(rows, observations, X, config.model.network)
    with staged_output(output_dir(config)) as staging:
        for name, values in fields.items():
            write_fields_csv(staging / f"{name}.csv", grid, {"value": values}, observations.mask)
    return EXIT_OK
