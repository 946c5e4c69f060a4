"""Pydantic schemas for covariance kernels."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class KernelFamily(str, Enum):
    EXPONENTIAL_SPACETIME = "exponential_spacetime"
    SQUARED_EXPONENTIAL_SPACE = "squared_exponential_space"


class KernelSpec(BaseModel):
    """Stationary covariance kernel with a single amplitude and length scale."""

    model_config = ConfigDict(frozen=True)

    family: KernelFamily
    variance: float = Field(..., gt=0)
    length_scale: float = Field(..., gt=0)

    @classmethod
    def squared_exponential(cls, variance: float, length_scale: float) -> "KernelSpec":
        return cls(
            family=KernelFamily.SQUARED_EXPONENTIAL_SPACE,
            variance=variance,
            length_scale=length_scale,
        )

    @classmethod
    def exponential(cls, variance: float, length_scale: float) -> "KernelSpec":
        return cls(
            family=KernelFamily.EXPONENTIAL_SPACETIME,
            variance=variance,
            length_scale=length_scale,
        )
