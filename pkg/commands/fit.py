"""`fit`: sample the hierarchical model posterior with NUTS."""

import argparse
import logging
from pathlib import Path

import numpy as np

from commands.base import input_path, load_config, output_dir
from core.config import settings
from core.exceptions import EXIT_OK, InvalidArgumentError
from core.rng import Stream, derive_seed, generator
from models.bpinn import BPINNModel, ModelData, PinnFit, fit_pinn
from numerics.diagnostics import diagnostics
from numerics.nuts import PosteriorSamples, nuts_sample
from schema.run import RunConfig
from schema.solver import INITIAL_CONDITIONS
from storage.artifacts import (
    DIAGNOSTICS_JSON,
    DRAWS_CSV,
    OBS_CSV,
    TRUTH_CSV,
    read_covariates,
    read_observations,
    staged_output,
    write_draws_csv,
    write_json,
)

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "fit",
        help="draw posterior samples with NUTS",
        description="Writes draws.csv and diagnostics.json to the output directory.",
    )
    parser.add_argument("--obs", help="observation CSV (default: <out>/obs.csv)")
    parser.add_argument(
        "--covariates",
        help="CSV with x1,x2 columns (default: truth.csv next to the observation file)",
    )
    parser.set_defaults(handler=cmd_fit)


def load_model_data(config: RunConfig, obs_path: Path, covariates_path: Path) -> ModelData:
    observations = read_observations(obs_path)
    grid, X = read_covariates(covariates_path)
    if not grid.same_as(observations.grid):
        raise InvalidArgumentError(
            f"covariate grid in {covariates_path} differs from the observation grid in {obs_path}"
        )
    return ModelData.build(
        observations, X, config.model.collocation, ic=INITIAL_CONDITIONS[config.solver.ic]
    )


def initial_points(model: BPINNModel, config: RunConfig, n_chains: int, seed: int) -> np.ndarray:
    warm_start: PinnFit | None = None
    if config.sampler.init == "pinn" and model.layout.latent:
        warm_start = fit_pinn(
            model.spec,
            model.data,
            max_iter=config.sampler.pinn_max_iter,
            seed=derive_seed(seed, Stream.INIT),
            initial_lambda=config.model.initial_lambda,
        )
    return np.stack(
        [model.initial_point(generator(seed, Stream.INIT, chain), warm_start) for chain in range(n_chains)]
    )


def constrained_rows(model: BPINNModel, samples: PosteriorSamples, include_weights: bool) -> list[dict[str, float]]:
    return [model.constrain(x).as_row(model.layout, include_weights) for x in samples.draws]


def cmd_fit(args: argparse.Namespace) -> int:
    config = load_config(args)
    obs_path = input_path(args.obs, config, OBS_CSV)
    covariates_path = Path(args.covariates) if args.covariates else obs_path.parent / TRUTH_CSV
    data = load_model_data(config, obs_path, covariates_path)
    model = BPINNModel(config.model, data)

    seed = config.experiment.seed
    nuts = config.sampler.nuts_config(fallback_seed=seed)
    logger.info(
        "Fitting %d parameters to %d observations (%d chains, %d+%d iterations)",
        model.dim, data.n_observed, nuts.n_chains, nuts.n_warmup, nuts.n_samples,
    )
    init = initial_points(model, config, nuts.n_chains, seed)
    samples = nuts_sample(model.logp_and_grad, init, nuts, max_workers=settings.max_workers)

    layout = model.layout
    include_weights = config.sampler.save_weights
    rows = constrained_rows(model, samples, include_weights)
    columns = layout.scalar_names + (layout.weight_names if include_weights else [])
    scalars = np.array([[row[name] for name in layout.scalar_names] for row in rows]).reshape(
        -1, len(layout.scalar_names)
    )

    with staged_output(output_dir(config)) as staging:
        write_draws_csv(staging / DRAWS_CSV, rows, samples.chain_ids, columns)
        if samples.n_draws:
            report = diagnostics(samples, layout.scalar_names, scalars)
            write_json(staging / DIAGNOSTICS_JSON, report)
        else:
            logger.warning("No post-warmup draws requested; diagnostics.json not written")

    logger.info(
        "Sampling finished: acceptance %.3f, %d divergences",
        samples.acceptance_rate if samples.n_draws else float("nan"),
        samples.divergences,
    )
    return EXIT_OK
