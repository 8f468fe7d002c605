from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings loaded from environment variables.

    Note: Variables use the FLUVGAN_ prefix (e.g. FLUVGAN_LOG_LEVEL=INFO).
    Run-specific knobs live in the JSON run configuration, not here.
    """

    model_config = SettingsConfigDict(env_prefix="FLUVGAN_", extra="ignore")

    # Environment
    environment: str = Field(default="development", description="Environment: development or production")

    # Logging
    log_level: str = Field(default="INFO", description="Logging level: DEBUG, INFO, WARNING, ERROR")

    # Numerics
    threads: int = Field(default=1, ge=1, description="BLAS threads; 1 guarantees determinism")
    precision: Literal["float64", "float32"] = Field(
        default="float64", description="Tensor precision: float64 or float32"
    )

    # Runs
    runs_dir: str = Field(default="runs", description="Default parent directory for run outputs")
    default_seed: int = Field(default=0, ge=0, description="Seed used when none is given")

    @property
    def is_production(self) -> bool:
        """Check if running in production environment."""
        return self.environment.lower() == "production"

    @property
    def is_development(self) -> bool:
        """Check if running in development environment."""
        return self.environment.lower() == "development"


settings = Settings()
