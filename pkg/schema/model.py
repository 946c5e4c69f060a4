"""Pydantic schemas for the hierarchical model: priors and collocation variances."""

from pydantic import BaseModel, ConfigDict, Field, field_validator

from schema.network import NeuralNetSpec

Bounds = tuple[float, float]


class PriorSettings(BaseModel):
    """Prior hyperparameters. Bounded parameters use truncated families on (lower, upper)."""

    model_config = ConfigDict(frozen=True)

    c_w: float = Field(default=1.0, gt=0, description="theta_W ~ N(0, c_w I)")
    c_beta: float = Field(default=10.0, gt=0, description="beta ~ N(mu_beta, c_beta I)")
    mu_beta: float = 0.0

    mu_lambda: float = 0.0
    sigma2_lambda: float = Field(default=1.0, gt=0)

    mu_d: float = 0.0
    gamma_d: float = Field(default=1.0, gt=0)
    sigma_d_bounds: Bounds = (0.1, 0.3)

    mu_nu: float = 0.0
    gamma_nu: float = Field(default=1.0, gt=0)
    sigma2_nu_bounds: Bounds = (0.02, 0.1)

    mu_ell: float = 0.0
    sigma2_ell: float = Field(default=1.0, gt=0)
    ell_nu_bounds: Bounds = (0.05, 0.2)

    @field_validator("sigma_d_bounds", "sigma2_nu_bounds", "ell_nu_bounds")
    @classmethod
    def check_bounds(cls, v: Bounds) -> Bounds:
        lower, upper = v
        if not 0 < lower < upper:
            raise ValueError(f"bounds must satisfy 0 < lower < upper, got {v}")
        return v


class CollocationSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma2_r: float = Field(default=0.05**2, gt=0)
    sigma2_bc: float = Field(default=0.01**2, gt=0)
    sigma2_ic: float = Field(default=0.01**2, gt=0)


class ModelSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    network: NeuralNetSpec = Field(default_factory=NeuralNetSpec)
    priors: PriorSettings = Field(default_factory=PriorSettings)
    collocation: CollocationSettings = Field(default_factory=CollocationSettings)
    latent_process: bool = True
    init_weight_scale: float = Field(default=0.1, gt=0)
    initial_lambda: float = Field(default=0.5, gt=0)


class PinnLossWeights(BaseModel):
    """Weights of the deterministic PINN objective (data, residual, boundary, initial)."""

    model_config = ConfigDict(frozen=True)

    a_data: float = Field(default=1.0, ge=0)
    a_residual: float = Field(default=1.0, ge=0)
    a_bc: float = Field(default=1.0, ge=0)
    a_ic: float = Field(default=1.0, ge=0)
