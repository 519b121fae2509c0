from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings. Pipeline parameters are CLI flags, not settings."""

    model_config = SettingsConfigDict(
        env_prefix="MVSREFINE_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Environment
    environment: str = Field(default="development")
    log_level: str = Field(default="WARNING")
    log_format: str = Field(default="json", pattern="^(json|console)$")

    # Per-view concurrency for the depth, refine and fuse stages
    workers: int = Field(default=1, ge=1)


@lru_cache()
def get_settings() -> Settings:
    """Returns a cached singleton instance of the settings."""
    return Settings()
