"""Pydantic schemas for the data-assimilation baselines."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _check_spd(name: str, matrix: np.ndarray) -> np.ndarray:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name} must be square, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=1e-14):
        raise ValueError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{name} must be positive definite") from exc
    return matrix


class ObservationStep(BaseModel):
    """z = H u + e, e ~ N(0, R) at one time."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    z: np.ndarray
    H: np.ndarray
    R: np.ndarray

    @field_validator("z", mode="before")
    @classmethod
    def as_vector(cls, v):
        return np.atleast_1d(np.asarray(v, dtype=float))

    @field_validator("H", mode="before")
    @classmethod
    def as_matrix(cls, v):
        return np.atleast_2d(np.asarray(v, dtype=float))

    @field_validator("R", mode="before")
    @classmethod
    def as_covariance(cls, v):
        return _check_spd("R", v)

    @model_validator(mode="after")
    def check_dimensions(self) -> "ObservationStep":
        m = self.z.shape[0]
        if self.H.shape[0] != m or self.R.shape != (m, m):
            raise ValueError(
                f"inconsistent observation shapes: z {self.z.shape}, H {self.H.shape}, R {self.R.shape}"
            )
        return self


class AssimConfig(BaseModel):
    """Background, model-error moments and optimizer settings for variational assimilation."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u_b: np.ndarray
    C_b: np.ndarray
    mu_eta: np.ndarray | None = None
    Q: np.ndarray | None = None
    max_iter: int = Field(default=500, ge=1)
    gtol: float = Field(default=1e-8, gt=0)
    max_restarts: int = Field(default=3, ge=0)

    @field_validator("u_b", "mu_eta", mode="before")
    @classmethod
    def as_vector(cls, v):
        return None if v is None else np.atleast_1d(np.asarray(v, dtype=float))

    @field_validator("C_b", mode="before")
    @classmethod
    def check_background(cls, v):
        return _check_spd("C_b", v)

    @field_validator("Q", mode="before")
    @classmethod
    def check_model_error(cls, v):
        return None if v is None else _check_spd("Q", v)

    @model_validator(mode="after")
    def check_dimensions(self) -> "AssimConfig":
        n = self.u_b.shape[0]
        if self.C_b.shape != (n, n):
            raise ValueError(f"C_b shape {self.C_b.shape} does not match state size {n}")
        if self.Q is not None and self.Q.shape != (n, n):
            raise ValueError(f"Q shape {self.Q.shape} does not match state size {n}")
        if self.mu_eta is not None and self.mu_eta.shape != (n,):
            raise ValueError(f"mu_eta shape {self.mu_eta.shape} does not match state size {n}")
        return self

    @property
    def state_dim(self) -> int:
        return int(self.u_b.shape[0])
