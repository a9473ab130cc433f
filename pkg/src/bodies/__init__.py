"""Symmetric convex and star-shaped bodies given by oracles.

The module-level helpers accept a single vector or a stack of vectors and check
dimensions before handing over to the body's vectorized oracles.
"""

from typing import Sequence, Union

import numpy as np

from src.bodies.combinations import (
    Dilate,
    GeometricMean,
    MinkowskiCombo,
    Union as UnionBody,
    dilate,
    geometric_mean,
    minkowski_combine,
    union,
)
from src.bodies.interfaces import Body, Direction, as_rows
from src.bodies.kinds import (
    Ball,
    Box,
    Ellipsoid,
    Halfspace,
    Slab,
    SymPolytope,
    ball,
    box,
    cross_polytope,
    ellipsoid,
    halfspace,
    slab,
    sym_polytope,
)

VectorInput = Union[Direction, Sequence[float], np.ndarray]


def _rows(body: Body, values: VectorInput):
    if isinstance(values, Direction):
        values = values.as_array()
    return as_rows(values, body.dim)


def support(body: Body, directions: VectorInput):
    """h_K on one direction (float) or on the rows of an array."""
    rows, single = _rows(body, directions)
    values = body.support_function(rows)
    return float(values[0]) if single else values


def contains(body: Body, points: VectorInput):
    rows, single = _rows(body, points)
    inside = body.membership(rows)
    return bool(inside[0]) if single else inside


def radial(body: Body, directions: VectorInput):
    rows, single = _rows(body, directions)
    if np.any(np.linalg.norm(rows, axis=1) == 0.0):
        raise ValueError("radial function is undefined at the zero vector")
    values = body.radial_function(rows)
    return float(values[0]) if single else values


def check_sublinearity(body: Body, first: np.ndarray, second: np.ndarray, lam: float = 0.5) -> float:
    """Largest h(lam a + (1-lam) b) - lam h(a) - (1-lam) h(b) over paired rows."""
    a, _ = as_rows(first, body.dim)
    b, _ = as_rows(second, body.dim)
    mixed = body.support_function(lam * a + (1.0 - lam) * b)
    bound = lam * body.support_function(a) + (1.0 - lam) * body.support_function(b)
    with np.errstate(invalid="ignore"):
        excess = np.where(np.isinf(bound), -np.inf, mixed - bound)
    return float(np.max(excess))


__all__ = [
    "Ball",
    "Body",
    "Box",
    "Dilate",
    "Direction",
    "Ellipsoid",
    "GeometricMean",
    "Halfspace",
    "MinkowskiCombo",
    "Slab",
    "SymPolytope",
    "UnionBody",
    "ball",
    "box",
    "check_sublinearity",
    "contains",
    "cross_polytope",
    "dilate",
    "ellipsoid",
    "geometric_mean",
    "halfspace",
    "minkowski_combine",
    "radial",
    "slab",
    "sym_polytope",
    "support",
    "union",
]
