"""Storage package - CSV/JSON artifacts."""

from storage.artifacts import (
    read_covariates,
    read_draws_csv,
    read_field_csv,
    read_json,
    read_observations,
    staged_output,
    write_draws_csv,
    write_field_csv,
    write_json,
    write_truth,
)

__all__ = [
    "staged_output",
    "write_json",
    "read_json",
    "write_field_csv",
    "read_field_csv",
    "write_draws_csv",
    "read_draws_csv",
    "write_truth",
    "read_observations",
    "read_covariates",
]
