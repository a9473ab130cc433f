"""JSON document model for body descriptions."""

from enum import Enum
from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field, field_validator


class BodyKind(str, Enum):
    """Serialized body kinds."""

    BALL = "ball"
    BOX = "box"
    ELLIPSOID = "ellipsoid"
    SYM_POLYTOPE = "sym-polytope"
    SLAB = "slab"
    HALFSPACE = "halfspace"
    MINKOWSKI_COMBO = "minkowski-combo"
    GEOMETRIC_MEAN = "geometric-mean"
    DILATE = "dilate"
    UNION = "union"


CHILD_COUNTS = {
    BodyKind.MINKOWSKI_COMBO.value: 2,
    BodyKind.GEOMETRIC_MEAN.value: 2,
    BodyKind.DILATE.value: 1,
}


class BodySpec(BaseModel):
    """{"kind": ..., "dim": n, "params": {...}, "children": [...]}"""

    kind: BodyKind = Field(..., description="Body kind")
    dim: int = Field(..., ge=1, le=6, description="Ambient dimension")
    params: Dict[str, Any] = Field(default_factory=dict, description="Kind parameters")
    children: List["BodySpec"] = Field(
        default_factory=list,
        validate_default=True,
        description="Operand bodies for derived kinds",
    )

    model_config = ConfigDict(
        use_enum_values=True, extra="forbid", ser_json_inf_nan="constants"
    )

    @field_validator("params")
    @classmethod
    def sort_params(cls, params: Dict[str, Any]) -> Dict[str, Any]:
        return {key: params[key] for key in sorted(params)}

    @field_validator("children")
    @classmethod
    def check_children(cls, children: List["BodySpec"], info: Any) -> List["BodySpec"]:
        kind = info.data.get("kind")
        expected = CHILD_COUNTS.get(kind)
        if expected is not None and len(children) != expected:
            raise ValueError(f"{kind} needs {expected} children, got {len(children)}")
        if kind == BodyKind.UNION.value and not children:
            raise ValueError("union needs at least one child")
        if kind not in CHILD_COUNTS and kind != BodyKind.UNION.value and children:
            raise ValueError(f"{kind} bodies take no children")
        return children
