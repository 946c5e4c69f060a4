"""Schema package - export all Pydantic schemas."""

from schema.assimilation import AssimConfig, ObservationStep
from schema.kernel import KernelFamily, KernelSpec
from schema.model import CollocationSettings, ModelSettings, PinnLossWeights, PriorSettings
from schema.network import LayerLayout, NeuralNetSpec
from schema.pnm import LinearOperatorSpec, PoissonDemoSettings
from schema.reports import (
    BaselineReport,
    DiagnosticsReport,
    ParameterSummary,
    PoissonDemoReport,
    SummaryReport,
)
from schema.run import RunConfig
from schema.sampler import NutsConfig, SamplerSettings
from schema.solver import INITIAL_CONDITIONS, BurgersConfig, gaussian_bump

__all__ = [
    # Kernels and solver
    "KernelFamily",
    "KernelSpec",
    "BurgersConfig",
    "INITIAL_CONDITIONS",
    "gaussian_bump",
    # Model
    "NeuralNetSpec",
    "LayerLayout",
    "PriorSettings",
    "CollocationSettings",
    "ModelSettings",
    "PinnLossWeights",
    # Inference
    "NutsConfig",
    "SamplerSettings",
    # Baselines
    "ObservationStep",
    "AssimConfig",
    "LinearOperatorSpec",
    "PoissonDemoSettings",
    # Reports
    "ParameterSummary",
    "DiagnosticsReport",
    "SummaryReport",
    "BaselineReport",
    "PoissonDemoReport",
    # Run configuration
    "RunConfig",
]
