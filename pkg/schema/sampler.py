"""Pydantic schemas for the No-U-Turn sampler."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class NutsConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_warmup: int = Field(default=1000, ge=0)
    n_samples: int = Field(default=1000, ge=0)
    max_tree_depth: int = Field(default=10, ge=1, le=12)
    target_accept: float = Field(default=0.8, gt=0, lt=1)
    seed: int = Field(default=0, ge=0)
    n_chains: int = Field(default=1, ge=1)

    # Adaptation schedule
    init_buffer: float = Field(default=0.15, ge=0, lt=1)
    term_buffer: float = Field(default=0.10, ge=0, lt=1)
    base_window: int = Field(default=25, ge=1)
    divergence_threshold: float = Field(default=1000.0, gt=0)
    initial_step_size: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def check_buffers(self) -> "NutsConfig":
        if self.init_buffer + self.term_buffer >= 1:
            raise ValueError("init_buffer + term_buffer must leave room for slow windows")
        return self


class SamplerSettings(NutsConfig):
    """Sampler section of a run configuration."""

    seed: int | None = Field(default=None, ge=0)  # type: ignore[assignment]
    save_weights: bool = True
    init: Literal["prior", "pinn"] = "prior"
    pinn_max_iter: int = Field(default=500, ge=1)

    def nuts_config(self, fallback_seed: int) -> NutsConfig:
        fields = self.model_dump(include=set(NutsConfig.model_fields))
        fields["seed"] = fallback_seed if self.seed is None else self.seed
        return NutsConfig(**fields)
