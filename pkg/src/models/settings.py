"""Settings and configuration management."""

import logging
from typing import Literal, Optional

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Laboratory settings loaded from ``GBM_*`` environment variables or ``.env``."""

    model_config = SettingsConfigDict(
        env_prefix="GBM_", env_file=".env", case_sensitive=False, extra="ignore"
    )

    # Sampling
    seed: Optional[int] = Field(
        None,
        ge=0,
        le=2**64 - 1,
        description="Monte Carlo seed; there is deliberately no wall-clock default",
    )
    samples: int = Field(
        1_000_000, ge=0, le=10**9, description="Monte Carlo sample count"
    )
    workers: int = Field(1, ge=1, le=256, description="Worker threads")

    # Membership nets for support-only bodies
    net_size_2d: int = Field(2048, ge=64, description="Direction net size in n=2")
    net_size_3d: int = Field(8192, ge=256, description="Direction net size in n=3")
    net_size_high: int = Field(
        16384, ge=1024, description="Quasi-random direction net size in n>=4"
    )

    # Sigma tables
    sigma_nodes: int = Field(4096, ge=1000, description="Radial nodes per table")
    sigma_r_max: float = Field(6.0, ge=3.0, le=8.0, description="Largest radius")

    # PDE solves
    pde_h: float = Field(0.005, gt=0.0, le=0.5, description="Grid spacing")
    cg_rtol: float = Field(1e-10, gt=0.0, lt=1e-3, description="CG relative residual")
    cg_maxiter: int = Field(20000, ge=10, description="CG iteration cap")

    # Verdicts
    holds_sigmas: float = Field(3.0, gt=0.0, description="Holds iff sigmas >= -this")
    violated_sigmas: float = Field(
        5.0, gt=0.0, description="Violated iff sigmas <= -this"
    )
    exact_tolerance: float = Field(
        1e-9, ge=0.0, le=1e-3, description="Zero band for error-free comparisons"
    )

    # Application Settings
    debug: bool = Field(False, description="Debug mode")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        "INFO", description="Root log level when --debug is not given"
    )

    @field_validator("log_level", mode="before")
    @classmethod
    def upper_log_level(cls, value: object) -> object:
        return value.upper() if isinstance(value, str) else value

    @model_validator(mode="after")
    def check_verdict_band(self) -> "Settings":
        """The inconclusive band must have non-negative width."""
        if self.violated_sigmas < self.holds_sigmas:
            raise ValueError("violated_sigmas must be at least holds_sigmas")
        return self

    def net_size(self, dim: int) -> int:
        if dim <= 2:
            return self.net_size_2d
        if dim == 3:
            return self.net_size_3d
        return self.net_size_high
