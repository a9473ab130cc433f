"""Data models for Gaussian measure estimates using Pydantic for validation."""

from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = "1.0"
CHUNK_SIZE = 16384


class EstimationMethod(str, Enum):
    """How a measure or moment was obtained."""

    EXACT = "exact-closed-form"
    QUADRATURE = "quadrature-1d"
    SPHERE_QUADRATURE = "quadrature-sphere"
    MONTE_CARLO = "monte-carlo"


class Quantity(str, Enum):
    """What an estimate measures."""

    PROBABILITY = "probability"
    SECOND_MOMENT = "second-moment"
    NORMALIZED_SECOND_MOMENT = "normalized-second-moment"


class SamplingBudget(BaseModel):
    """Monte Carlo budget: sample count, seed and worker threads."""

    samples: int = Field(..., ge=0, description="Number of standard normal points")
    seed: Optional[int] = Field(
        None, ge=0, le=2**64 - 1, description="64-bit seed of the counter-based stream"
    )
    workers: int = Field(1, ge=1, description="Threads; results do not depend on it")

    model_config = ConfigDict(frozen=True)

    @property
    def chunks(self) -> int:
        return -(-self.samples // CHUNK_SIZE)


class MeasureEstimate(BaseModel):
    """A Gaussian measure or moment value with its provenance."""

    schema_version: str = Field(SCHEMA_VERSION, description="Report schema version")
    quantity: Quantity = Field(Quantity.PROBABILITY, description="Estimated quantity")
    value: float = Field(..., description="Point estimate")
    std_error: float = Field(0.0, ge=0.0, description="Standard error (0 if exact)")
    method: EstimationMethod = Field(..., description="Evaluation method")
    samples: int = Field(0, ge=0, description="Monte Carlo samples used")
    seed: Optional[int] = Field(None, description="Seed (absent for exact values)")
    body_kind: Optional[str] = Field(None, description="Kind of the measured body")
    dim: Optional[int] = Field(None, ge=1, description="Ambient dimension")
    metadata: Dict[str, Any] = Field(
        default_factory=dict, description="Approximation flags and diagnostics"
    )

    model_config = ConfigDict(use_enum_values=True)

    @model_validator(mode="after")
    def check_consistency(self) -> "MeasureEstimate":
        if self.method == EstimationMethod.EXACT.value and self.std_error != 0.0:
            raise ValueError("exact estimates carry zero standard error")
        if self.quantity == Quantity.PROBABILITY.value and not (
            -1e-15 <= self.value <= 1.0 + 1e-15
        ):
            raise ValueError(f"probability out of range: {self.value}")
        if self.method != EstimationMethod.MONTE_CARLO.value and self.seed is not None:
            raise ValueError("only Monte Carlo estimates carry a seed")
        return self

    @property
    def is_sampled(self) -> bool:
        return self.method == EstimationMethod.MONTE_CARLO.value
