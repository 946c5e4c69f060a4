"""Core package - settings, logging, errors and seed streams."""

from core.config import get_settings, load_run_config, settings
from core.exceptions import (
    ConfigError,
    DataFileError,
    FactorizationError,
    GmidError,
    InstabilityError,
    InvalidArgumentError,
    NonFiniteError,
    NotFoundError,
    NumericalError,
    OptimizationError,
    QuadratureError,
    SamplerError,
    handle_command_errors,
)
from core.logging import setup_logging
from core.rng import Stream, derive_seed, generator

__all__ = [
    # Config
    "settings",
    "get_settings",
    "load_run_config",
    # Exceptions
    "GmidError",
    "InvalidArgumentError",
    "ConfigError",
    "DataFileError",
    "NotFoundError",
    "NumericalError",
    "FactorizationError",
    "InstabilityError",
    "QuadratureError",
    "NonFiniteError",
    "SamplerError",
    "OptimizationError",
    "handle_command_errors",
    # Logging
    "setup_logging",
    # Seeds
    "Stream",
    "derive_seed",
    "generator",
]
