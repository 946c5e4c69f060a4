"""
Process settings and run-configuration loading using Pydantic v2 settings.
"""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict, TomlConfigSettingsSource

from core.exceptions import ConfigError, NotFoundError
from schema.run import RunConfig

_PROJECT_DIR = Path(__file__).resolve().parents[1]
_ENV_FILE = _PROJECT_DIR / ".env"


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=str(_ENV_FILE) if _ENV_FILE.exists() else None,
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # -------------------------
    # Environment
    # -------------------------
    environment: Literal["development", "staging", "production"] = Field(
        default="development", alias="ENVIRONMENT"
    )

    # -------------------------
    # Logging
    # -------------------------
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    log_format: Literal["simple", "detailed", "json"] | None = Field(
        default=None, alias="LOG_FORMAT"
    )

    # -------------------------
    # Runs
    # -------------------------
    output_dir: Path = Field(default=Path("out"), alias="GMID_OUTPUT_DIR")
    max_workers: int = Field(default=1, ge=1, alias="GMID_MAX_WORKERS")

    # -------------------------
    # Validators
    # -------------------------
    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        if v is None:
            return "INFO"
        return str(v).upper()

    @model_validator(mode="after")
    def default_log_format(self) -> "Settings":
        if self.log_format is None:
            self.log_format = "json" if self.environment == "production" else "detailed"
        return self


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()


def load_run_config(
    path: Path | str | None = None,
    seed: int | None = None,
    output_dir: Path | str | None = None,
) -> RunConfig:
    """
    Build a RunConfig from an optional TOML file plus CLI overrides.

    An absent path yields the all-defaults configuration.
    """
    data: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise NotFoundError("config file", path)
        try:
            data = TomlConfigSettingsSource(RunConfig, toml_file=path)()
        except Exception as exc:  # tomllib raises its own decode error type
            raise ConfigError(f"cannot parse config file {path}: {exc}") from exc

    experiment = dict(data.get("experiment", {}))
    if seed is not None:
        experiment["seed"] = seed
    if output_dir is not None:
        experiment["output_dir"] = str(output_dir)
    elif "output_dir" not in experiment:
        experiment["output_dir"] = str(settings.output_dir)
    data["experiment"] = experiment

    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        errors = [
            {"field": ".".join(map(str, err["loc"])), "message": err["msg"]}
            for err in exc.errors()
        ]
        raise ConfigError("invalid run configuration", details={"errors": errors}) from exc
