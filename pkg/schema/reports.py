"""Serializable report models written as JSON artifacts."""

from typing import Any

from pydantic import BaseModel, Field


class ParameterSummary(BaseModel):
    name: str
    mean: float
    std: float
    lower: float = Field(..., description="2.5% quantile")
    upper: float = Field(..., description="97.5% quantile")
    ess: float | None = None
    ess_reliable: bool = True
    rhat: float | None = None
    truth: float | None = None
    covered: bool | None = None


class DiagnosticsReport(BaseModel):
    n_chains: int
    n_draws: int
    acceptance_rate: float
    divergences: int
    tree_depth_saturations: int = 0
    step_sizes: list[float] = Field(default_factory=list)
    parameters: list[ParameterSummary] = Field(default_factory=list)
    metadata: dict[str, Any] = Field(default_factory=dict)


class SummaryReport(BaseModel):
    n_draws: int
    parameters: list[ParameterSummary]
    truth_provided: bool = False
    all_covered: bool | None = None


class BaselineReport(BaseModel):
    mode: str
    rmse_vs_truth: float | None = None
    rmse_vs_observations: float
    converged: bool | None = None
    n_iterations: int | None = None
    final_objective: float | None = None
    gradient_norm: float | None = None


class PoissonDemoReport(BaseModel):
    max_abs_error: float
    max_posterior_std: float
    consistent: bool
    n_collocation: int
