"""Process settings using Pydantic Settings."""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class LoggingSettings(BaseSettings):
    """Logging configuration."""

    model_config = SettingsConfigDict(env_prefix="LOG_", case_sensitive=False)

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO", description="Log level"
    )
    format: Literal["console", "json"] = Field(
        default="console", description="Log format (console or json)"
    )
    export_logs: bool = Field(default=False, description="Also write JSON lines to a file")
    dir: str = Field(default="logs", description="Log directory")
    file: str = Field(default="atvr.log", description="Log filename")

    @field_validator("level", mode="before")
    @classmethod
    def _upper(cls, v: str) -> str:
        return v.upper() if isinstance(v, str) else v


class RuntimeSettings(BaseSettings):
    """Defaults for experiment runs; CLI flags take precedence."""

    model_config = SettingsConfigDict(env_prefix="ATVR_", case_sensitive=False)

    seed: int = Field(default=0, ge=0, description="Default random seed")
    out_dir: Path = Field(default=Path("runs"), description="Default output directory")
    threads: int = Field(default=1, ge=1, description="Worker threads for per-model maps")


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    runtime: RuntimeSettings = Field(default_factory=RuntimeSettings)


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
