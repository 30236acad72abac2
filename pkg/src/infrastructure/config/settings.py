"""
Infrastructure Layer - Configuration

Checker settings come from `HGCHECK_*` environment variables and an optional
`.env` file; command-line flags override them per run through
`settings.model_copy(update=...)`.
"""

from fractions import Fraction
from functools import lru_cache
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class CheckerSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="HGCHECK_", env_file=".env", extra="ignore")

    solver: Optional[str] = None  # external SMT-LIB solver command
    solver_timeout: float = Field(default=20.0, gt=0)
    export_dir: str = "build/obligations"
    default_delta: Optional[str] = None
    rewrite_budget: int = Field(default=64, ge=1)
    product_limit: int = Field(default=400, ge=0)
    dnf_limit: int = Field(default=256, ge=1)
    log_level: str = "WARNING"

    @field_validator("default_delta")
    @classmethod
    def _rational_delta(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        try:
            delta = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"default_delta must be a rational number, got {value!r}") from exc
        if delta <= 0:
            raise ValueError("default_delta must be positive")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value}")
        return level

    @property
    def delta(self) -> Optional[Fraction]:
        return Fraction(self.default_delta) if self.default_delta is not None else None


@lru_cache
def get_settings() -> CheckerSettings:
    return CheckerSettings()
