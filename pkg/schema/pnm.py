"""Pydantic schema for linear differential operators."""

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator


class LinearOperatorSpec(BaseModel):
    """M u = c0 u + c1 du/ds + c2 d2u/ds2."""

    model_config = ConfigDict(frozen=True)

    identity: float = 0.0
    first_derivative: float = 0.0
    second_derivative: float = 0.0

    @model_validator(mode="after")
    def check_coefficients(self) -> "LinearOperatorSpec":
        coefficients = self.coefficients
        if not all(math.isfinite(c) for c in coefficients):
            raise ValueError("operator coefficients must be finite")
        if not any(c != 0.0 for c in coefficients):
            raise ValueError("operator needs at least one nonzero coefficient")
        return self

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (self.identity, self.first_derivative, self.second_derivative)

    @classmethod
    def negative_laplacian(cls) -> "LinearOperatorSpec":
        return cls(second_derivative=-1.0)


class PoissonDemoSettings(BaseModel):
    """-u'' = forcing on [0, 1] with zero boundary values."""

    model_config = ConfigDict(frozen=True)

    n_collocation: int = Field(default=20, ge=2)
    n_query: int = Field(default=101, ge=2)
    forcing: float = 2.0
    noise_var: float = Field(default=1e-8, ge=0)
    kernel_variance: float = Field(default=1.0, gt=0)
    kernel_length_scale: float = Field(default=0.5, gt=0)
