"""
Run configuration. Every default reproduces the reference simulation study,
so an empty configuration file is a complete experiment.
"""

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from schema.model import ModelSettings
from schema.pnm import PoissonDemoSettings
from schema.sampler import SamplerSettings
from schema.solver import INITIAL_CONDITIONS


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# =====================================================
# Sections
# =====================================================

class ExperimentSettings(_Section):
    name: str = "gmid-dstm"
    seed: int = Field(default=2023, ge=0)
    output_dir: str = "out"


class GridSettings(_Section):
    n: int = Field(default=51, ge=3)
    T: int = Field(default=25, ge=2)
    s_min: float = -math.pi
    s_max: float = math.pi
    t_max: float = Field(default=5.0, gt=0)

    @model_validator(mode="after")
    def check_interval(self) -> "GridSettings":
        if self.s_min >= self.s_max:
            raise ValueError("s_min must be smaller than s_max")
        return self


class SimulationSettings(_Section):
    covariate_variance: float = Field(default=0.1, gt=0)
    covariate_length_scale: float = Field(default=8.03 / 20, gt=0)
    beta: tuple[float, float] = (0.3, -0.2)
    lambda_true: float = Field(default=0.1, gt=0)
    sigma2_nu: float = Field(default=0.05, gt=0)
    ell_nu: float = Field(default=0.15, gt=0)
    noise_std: float = Field(default=0.2, ge=0)
    missing_fraction: float = Field(default=0.5, ge=0, le=1)


class SolverSettings(_Section):
    n_internal: int = Field(default=256, ge=8)
    dt_internal: float = Field(default=1e-3, gt=0)
    ic: str = "gaussian_bump"
    scheme: Literal["spectral", "finite_difference"] = "spectral"

    @model_validator(mode="after")
    def check_ic(self) -> "SolverSettings":
        if self.ic not in INITIAL_CONDITIONS:
            raise ValueError(f"unknown initial condition {self.ic!r}; choose from {sorted(INITIAL_CONDITIONS)}")
        return self


class PredictSettings(_Section):
    thin: int = Field(default=5, ge=1)


class BaselineSettings(_Section):
    background_variance: float = Field(default=0.1, gt=0)
    background_length_scale: float = Field(default=0.3, gt=0)
    obs_noise_std: float = Field(default=0.2, gt=0)
    model_error_variance: float = Field(default=1e-3, gt=0)
    max_iter: int = Field(default=200, ge=1)
    gtol: float = Field(default=1e-6, gt=0)
    coarse_dt: float = Field(default=0.02, gt=0, description="largest substep of the coarse model")


# =====================================================
# Root
# =====================================================

class RunConfig(BaseModel):
    """Complete configuration of one experiment."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentSettings = Field(default_factory=ExperimentSettings)
    grid: GridSettings = Field(default_factory=GridSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    model: ModelSettings = Field(default_factory=ModelSettings)
    sampler: SamplerSettings = Field(default_factory=SamplerSettings)
    predict: PredictSettings = Field(default_factory=PredictSettings)
    baseline: BaselineSettings = Field(default_factory=BaselineSettings)
    pnm: PoissonDemoSettings = Field(default_factory=PoissonDemoSettings)
