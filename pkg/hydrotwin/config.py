"""
Application configuration using Pydantic Settings.
"""
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


LOG_LEVEL_ALIASES = {
    "error": "ERROR",
    "warn": "WARNING",
    "warning": "WARNING",
    "info": "INFO",
    "debug": "DEBUG",
}


class Settings(BaseSettings):
    """Pipeline settings loaded from HYDROTWIN_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="HYDROTWIN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = Field(default="INFO", description="error, warn, info or debug")
    log_file: Optional[str] = Field(default=None, description="Optional log file path")

    # Paths
    output_dir: Path = Field(default=Path("./outputs"))

    # Featurization
    epsilon: float = Field(default=1e-3, gt=0, description="Velocity deadband (m/s)")
    sg_window: int = Field(default=11, ge=5)
    sg_order: int = Field(default=3, ge=2)

    # Gaussian-process training
    seed: int = Field(default=0)
    gp_restarts: int = Field(default=5, ge=1)
    gp_max_iter: int = Field(default=200, ge=1)
    gp_max_rows: int = Field(default=4000, ge=2, description="Exact-inference row cap")
    max_train_rows: int = Field(default=300, ge=10, description="Rows kept per direction partition")

    # Pump model
    margin_iterations: int = Field(default=2000, ge=1)
    standby_pressure: float = Field(default=2.0e6, ge=0, description="Pa, used without a plant section")

    # Processing
    max_concurrent_jobs: int = Field(default=3, ge=1)

    @field_validator("log_level")
    @classmethod
    def normalize_log_level(cls, v: str) -> str:
        """Accept the lower-case level names used on the command line."""
        level = LOG_LEVEL_ALIASES.get(v.strip().lower())
        if level is None:
            raise ValueError(f"log level must be one of {sorted(LOG_LEVEL_ALIASES)}")
        return level


# Global settings instance
settings = Settings()
