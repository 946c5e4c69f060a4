"""`baseline`: classical data assimilation on the coarse Burgers model."""

import argparse
import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np

from commands.base import input_path, load_config, output_dir, rmse
from core.exceptions import EXIT_OK
from models.grid import Field, ObservationOperator
from numerics.assimilation import (
    background_covariance,
    kalman_filter,
    linearize_model,
    optimal_interpolation,
    var4d,
)
from numerics.burgers import coarse_model
from schema.assimilation import AssimConfig, ObservationStep
from schema.kernel import KernelSpec
from schema.reports import BaselineReport
from schema.run import RunConfig
from schema.solver import INITIAL_CONDITIONS, BurgersConfig
from storage.artifacts import (
    OBS_CSV,
    TRUTH_CSV,
    read_observations,
    read_truth_field,
    staged_output,
    write_field_csv,
    write_json,
)

logger = logging.getLogger(__name__)

MODES = ("oi", "kalman", "4dvar-strong", "4dvar-weak")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "baseline",
        help="assimilate observations with OI, a Kalman filter or 4DVar",
        description="Writes analysis_<mode>.csv and baseline_<mode>.json to the output directory.",
    )
    parser.add_argument("--mode", choices=MODES, required=True)
    parser.add_argument("--obs", help="observation CSV (default: <out>/obs.csv)")
    parser.add_argument("--truth", help="truth CSV with a u_tilde column (default: truth.csv next to --obs, if present)")
    parser.set_defaults(handler=cmd_baseline)


def observation_window(observations: Field, noise_std: float) -> list[ObservationStep | None]:
    """One observation step per grid time; None where nothing is observed."""
    op = ObservationOperator.from_mask(observations.mask)
    window: list[ObservationStep | None] = []
    for k in range(observations.grid.T):
        cols = op.indices[k]
        if cols.size == 0:
            window.append(None)
            continue
        window.append(
            ObservationStep(
                z=observations.values[k, cols],
                H=op.matrix(k),
                R=noise_std**2 * np.eye(cols.size),
            )
        )
    return window


def free_run(model: Callable[[Any], Any], u0: np.ndarray, T: int) -> np.ndarray:
    states = [u0]
    for _ in range(T - 1):
        states.append(np.asarray(model(states[-1]), dtype=float))
    return np.array(states)


def run_baseline(config: RunConfig, observations: Field, mode: str) -> tuple[np.ndarray, BaselineReport]:
    """Analysis field (T, n) and its report; RMSE against truth is filled in by the caller."""
    grid = observations.grid
    settings = config.baseline
    burgers = BurgersConfig(
        lam=config.simulation.lambda_true,
        n_internal=grid.n,
        dt_internal=settings.coarse_dt,
        ic=INITIAL_CONDITIONS[config.solver.ic],
        s_min=float(grid.s_nodes[0]),
        s_max=float(grid.s_nodes[-1]),
    )
    model, _ = coarse_model(burgers, grid.dt)

    u_b = np.asarray(burgers.ic(grid.s_nodes), dtype=float)
    u_b[0], u_b[-1] = burgers.bc_left, burgers.bc_right
    C_b = background_covariance(
        grid.s_nodes,
        KernelSpec.squared_exponential(settings.background_variance, settings.background_length_scale),
    )
    Q = settings.model_error_variance * np.eye(grid.n)
    window = observation_window(observations, settings.obs_noise_std)

    extra: dict[str, Any] = {}
    if mode == "oi":
        background = free_run(model, u_b, grid.T)
        analysis = np.array(
            [
                background[k] if step is None else optimal_interpolation(background[k], C_b, step.H, step.R, step.z)
                for k, step in enumerate(window)
            ]
        )
    elif mode == "kalman":
        background = free_run(model, u_b, grid.T)
        mats, offsets = linearize_model(model, background[:-1])
        analysis = kalman_filter(window, mats, Q, u_b, C_b, offsets=list(offsets)).filtered_means
    else:
        assim = AssimConfig(
            u_b=u_b,
            C_b=C_b,
            mu_eta=np.zeros(grid.n),
            Q=Q,
            max_iter=settings.max_iter,
            gtol=settings.gtol,
        )
        result = var4d(u_b, window, assim, model, mode="strong" if mode == "4dvar-strong" else "weak")
        analysis = result.trajectory
        extra = {
            "converged": result.converged,
            "n_iterations": result.n_iterations,
            "final_objective": result.final_objective,
            "gradient_norm": result.gradient_norm,
        }

    report = BaselineReport(
        mode=mode,
        rmse_vs_observations=rmse(analysis, observations.values, observations.mask),
        **extra,
    )
    return analysis, report


def cmd_baseline(args: argparse.Namespace) -> int:
    config = load_config(args)
    obs_path = input_path(args.obs, config, OBS_CSV)
    observations = read_observations(obs_path)
    truth_path = Path(args.truth) if args.truth else obs_path.parent / TRUTH_CSV

    analysis, report = run_baseline(config, observations, args.mode)
    if args.truth or truth_path.is_file():
        grid, u_tilde = read_truth_field(truth_path, "u_tilde")
        if grid.same_as(observations.grid):
            report = report.model_copy(update={"rmse_vs_truth": rmse(analysis, u_tilde)})
        else:
            logger.warning("Truth grid in %s differs from the observation grid; RMSE skipped", truth_path)

    with staged_output(output_dir(config)) as staging:
        write_field_csv(staging / f"analysis_{args.mode}.csv", Field(observations.grid, analysis, observations.mask))
        write_json(staging / f"baseline_{args.mode}.json", report)
    logger.info("Baseline %s: RMSE vs observations %.4f", args.mode, report.rmse_vs_observations)
    return EXIT_OK
