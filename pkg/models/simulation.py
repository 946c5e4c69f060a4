"""
Synthetic data generation: covariate mean + Burgers dynamics + GP discrepancy,
observed with Gaussian noise on a fixed-in-time subset of spatial columns.
"""

import logging
from dataclasses import dataclass

import numpy as np

from core.rng import Stream, derive_seed, generator
from models.grid import Field, SpaceTimeGrid, build_grid, make_mask
from numerics.burgers import solve
from numerics.random_fields import sample_gp
from schema.kernel import KernelSpec
from schema.run import RunConfig
from schema.solver import INITIAL_CONDITIONS, BurgersConfig

logger = logging.getLogger(__name__)

N_COVARIATES = 2


@dataclass(frozen=True, eq=False)
class SimulationTruth:
    """Every component of one simulated realization."""

    u_true: Field
    u_tilde: Field
    mu: Field
    nu: Field
    beta_true: np.ndarray
    lambda_true: float
    sigma_d_true: float
    sigma2_nu_true: float
    ell_nu_true: float
    covariates: tuple[Field, ...]
    observations: Field
    seed: int

    @property
    def grid(self) -> SpaceTimeGrid:
        return self.u_true.grid

    def covariate_array(self) -> np.ndarray:
        """Covariates stacked as (T, n, p)."""
        return np.stack([x.values for x in self.covariates], axis=-1)

    def parameters(self) -> dict[str, float]:
        """Generative values keyed by posterior column name."""
        return {
            "beta1": float(self.beta_true[0]),
            "beta2": float(self.beta_true[1]),
            "lambda": self.lambda_true,
            "sigma_d": self.sigma_d_true,
            "sigma2_nu": self.sigma2_nu_true,
            "ell_nu": self.ell_nu_true,
        }


def burgers_config(config: RunConfig) -> BurgersConfig:
    """Solver configuration implied by a run configuration."""
    return BurgersConfig(
        lam=config.simulation.lambda_true,
        n_internal=config.solver.n_internal,
        dt_internal=config.solver.dt_internal,
        ic=INITIAL_CONDITIONS[config.solver.ic],
        s_min=config.grid.s_min,
        s_max=config.grid.s_max,
    )


def simulate(config: RunConfig, seed: int | None = None) -> SimulationTruth:
    """Run the data-generating pipeline; every random draw uses its own seed stream."""
    seed = config.experiment.seed if seed is None else seed
    sim = config.simulation
    g = config.grid

    grid = build_grid(g.n, g.T, g.s_min, g.s_max, g.t_max)

    covariate_kernel = KernelSpec.exponential(sim.covariate_variance, sim.covariate_length_scale)
    points = grid.points()
    covariates = tuple(
        Field(
            grid,
            sample_gp(covariate_kernel, points, derive_seed(seed, Stream.COVARIATES, j))
            .values.reshape(grid.shape),
        )
        for j in range(N_COVARIATES)
    )
    beta = np.asarray(sim.beta, dtype=float)
    mu = sum(b * x.values for b, x in zip(beta, covariates, strict=True))

    u_tilde = solve(burgers_config(config), grid, scheme=config.solver.scheme)

    discrepancy_kernel = KernelSpec.squared_exponential(sim.sigma2_nu, sim.ell_nu)
    nu = np.stack(
        [
            sample_gp(discrepancy_kernel, grid.s_nodes, derive_seed(seed, Stream.DISCREPANCY, k)).values
            for k in range(grid.T)
        ]
    )

    u_true = mu + u_tilde.values + nu
    noise = sim.noise_std * generator(seed, Stream.NOISE).standard_normal(grid.shape)
    mask = make_mask(grid, sim.missing_fraction, derive_seed(seed, Stream.MASK))
    z = np.where(mask, u_true + noise, np.nan)

    logger.info(
        "Simulated %dx%d realization (seed=%d, %d observed entries)",
        grid.T, grid.n, seed, int(mask.sum()),
    )
    return SimulationTruth(
        u_true=Field(grid, u_true),
        u_tilde=u_tilde,
        mu=Field(grid, mu),
        nu=Field(grid, nu),
        beta_true=beta,
        lambda_true=sim.lambda_true,
        sigma_d_true=sim.noise_std,
        sigma2_nu_true=sim.sigma2_nu,
        ell_nu_true=sim.ell_nu,
        covariates=covariates,
        observations=Field(grid, z, mask),
        seed=seed,
    )
