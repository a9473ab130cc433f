"""Body descriptions to and from canonical JSON documents."""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Union

from pydantic import ValidationError

from src.bodies.combinations import Dilate, GeometricMean, MinkowskiCombo, Union as UnionBody
from src.bodies.interfaces import Body
from src.bodies.kinds import Ball, Box, Ellipsoid, Halfspace, Slab, SymPolytope
from src.core.errors import DimensionMismatchError, GbmError, SchemaError
from src.models.body_spec import BodySpec

logger = logging.getLogger(__name__)


def body_to_spec(body: Body) -> BodySpec:
    return BodySpec(
        kind=body.kind,
        dim=body.dim,
        params=body.params(),
        children=[body_to_spec(child) for child in body.children()],
    )


def _param(spec: BodySpec, key: str) -> Any:
    try:
        return spec.params[key]
    except KeyError:
        raise SchemaError(f"{spec.kind} body is missing parameter '{key}'") from None


def _ball(spec: BodySpec, children: List[Body]) -> Body:
    return Ball(spec.dim, float(_param(spec, "radius")))


def _box(spec: BodySpec, children: List[Body]) -> Body:
    return Box(tuple(_param(spec, "half_widths")))


def _ellipsoid(spec: BodySpec, children: List[Body]) -> Body:
    return Ellipsoid(tuple(_param(spec, "semi_axes")))


def _polytope(spec: BodySpec, children: List[Body]) -> Body:
    return SymPolytope(tuple(tuple(v) for v in _param(spec, "vertices")))


def _slab(spec: BodySpec, children: List[Body]) -> Body:
    cap = spec.params.get("cap")
    return Slab(
        n=spec.dim,
        half_width=float(_param(spec, "half_width")),
        axis=int(spec.params.get("axis", 0)),
        cap=None if cap is None else float(cap),
    )


def _halfspace(spec: BodySpec, children: List[Body]) -> Body:
    return Halfspace(tuple(_param(spec, "normal")), float(_param(spec, "offset")))


def _combo(spec: BodySpec, children: List[Body]) -> Body:
    return MinkowskiCombo(
        float(_param(spec, "lambda")), children[0], children[1], int(spec.params.get("net_size", 0))
    )


def _geomean(spec: BodySpec, children: List[Body]) -> Body:
    return GeometricMean(
        float(_param(spec, "lambda")), children[0], children[1], int(spec.params.get("net_size", 0))
    )


def _dilate(spec: BodySpec, children: List[Body]) -> Body:
    return Dilate(float(_param(spec, "factor")), children[0])


def _union(spec: BodySpec, children: List[Body]) -> Body:
    return UnionBody(tuple(children))


BUILDERS: Dict[str, Callable[[BodySpec, List[Body]], Body]] = {
    "ball": _ball,
    "box": _box,
    "ellipsoid": _ellipsoid,
    "sym-polytope": _polytope,
    "slab": _slab,
    "halfspace": _halfspace,
    "minkowski-combo": _combo,
    "geometric-mean": _geomean,
    "dilate": _dilate,
    "union": _union,
}


def body_from_spec(spec: BodySpec) -> Body:
    """Build a body, checking that the declared dimension matches its parameters."""
    children = [body_from_spec(child) for child in spec.children]
    try:
        body = BUILDERS[spec.kind](spec, children)
    except GbmError:
        raise
    except (TypeError, KeyError, IndexError, ValueError) as e:
        raise SchemaError(f"malformed {spec.kind} parameters: {e}") from e
    if body.dim != spec.dim:
        raise DimensionMismatchError(
            f"{spec.kind} body declares dim={spec.dim} but its parameters give {body.dim}"
        )
    return body


def dumps_body(body: Body) -> str:
    """Compact canonical JSON."""
    return body_to_spec(body).model_dump_json()


def loads_body(text: str) -> Body:
    try:
        data = json.loads(text)
        spec = BodySpec.model_validate(data)
    except json.JSONDecodeError as e:
        raise SchemaError(f"body document is not valid JSON: {e}") from e
    except ValidationError as e:
        raise SchemaError(f"body document does not match the schema: {e}") from e
    return body_from_spec(spec)


def load_body(path: Union[str, Path]) -> Body:
    """Read a body document; OSError propagates for unreadable files."""
    text = Path(path).read_text(encoding="utf-8")
    body = loads_body(text)
    logger.debug(f"Loaded {body.describe()} from {path}")
    return body


def save_body(body: Body, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_body(body) + "\n", encoding="utf-8")
