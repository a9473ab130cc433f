"""Check case documents: the unit of work of a corpus run."""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.body_spec import BodySpec


class CheckCase(BaseModel):
    """A pair of bodies, a mixing weight and the checks to run on them."""

    name: str = Field(..., min_length=1, description="Unique case name")
    first: BodySpec = Field(..., description="K")
    second: Optional[BodySpec] = Field(None, description="L, for pair checks")
    lam: float = Field(0.5, gt=0.0, lt=1.0, description="Mixing weight lambda")
    delta: float = Field(1.0, gt=0.0, description="Exponent scale: checks use delta/n")
    checks: List[str] = Field(
        default_factory=list, description="Check names; empty selects every applicable check"
    )
    samples: Optional[int] = Field(None, ge=0, description="Per-case sample budget override")
    seed: Optional[int] = Field(None, ge=0, le=2**64 - 1, description="Per-case seed override")

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_dimensions(self) -> "CheckCase":
        if self.second is not None and self.second.dim != self.first.dim:
            raise ValueError(
                f"case {self.name}: bodies have dimensions {self.first.dim} and {self.second.dim}"
            )
        return self

    @property
    def dim(self) -> int:
        return self.first.dim
