"""Primitive body kinds with exact oracles."""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from src.bodies.interfaces import MEMBERSHIP_TOLERANCE, Body
from src.core.errors import DegenerateBodyError, DimensionMismatchError

logger = logging.getLogger(__name__)


def _positive_tuple(values: Any, name: str) -> Tuple[float, ...]:
    result = tuple(float(v) for v in values)
    if not result:
        raise DimensionMismatchError(f"{name} must not be empty")
    if any(not v > 0.0 for v in result):
        raise DegenerateBodyError(f"{name} must be strictly positive, got {result}")
    return result


@dataclass(frozen=True, eq=True)
class Ball(Body):
    """Centered Euclidean ball; ``radius`` may be ``math.inf``."""

    n: int
    radius: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DimensionMismatchError(f"dimension must be positive, got {self.n}")
        if not self.radius > 0.0:
            raise DegenerateBodyError(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return self.n

    @property
    def kind(self) -> str:
        return "ball"

    def params(self) -> Dict[str, Any]:
        return {"radius": self.radius}

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(directions, axis=1)
        if math.isinf(self.radius):
            return np.where(norms > 0.0, math.inf, 0.0)
        return self.radius * norms

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(directions, axis=1, keepdims=True)
        return self.radius * directions / np.where(norms > 0.0, norms, 1.0)

    def membership(self, points: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ij->i", points, points) <= self.radius**2

    def radial_function(self, directions: np.ndarray) -> np.ndarray:
        return self.radius / np.linalg.norm(directions, axis=1)


@dataclass(frozen=True, eq=True)
class Box(Body):
    """Axis-aligned centered box with the given half-widths."""

    half_widths: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "half_widths", _positive_tuple(self.half_widths, "half_widths")
        )

    @property
    def dim(self) -> int:
        return len(self.half_widths)

    @property
    def kind(self) -> str:
        return "box"

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.half_widths)

    def params(self) -> Dict[str, Any]:
        return {"half_widths": list(self.half_widths)}

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        return np.abs(directions) @ self.widths

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        return np.sign(directions) * self.widths

    def membership(self, points: np.ndarray) -> np.ndarray:
        return np.all(np.abs(points) <= self.widths, axis=1)

    def radial_function(self, directions: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            ratios = self.widths / np.abs(directions)
        return np.min(ratios, axis=1)


@dataclass(frozen=True, eq=True)
class Ellipsoid(Body):
    """Axis-aligned ellipsoid sum (x_i / a_i)^2 <= 1."""

    semi_axes: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "semi_axes", _positive_tuple(self.semi_axes, "semi_axes")
        )

    @property
    def dim(self) -> int:
        return len(self.semi_axes)

    @property
    def kind(self) -> str:
        return "ellipsoid"

    @property
    def axes(self) -> np.ndarray:
        return np.asarray(self.semi_axes)

    def params(self) -> Dict[str, Any]:
        return {"semi_axes": list(self.semi_axes)}

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        return np.sqrt(np.square(directions) @ np.square(self.axes))

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        h = self.support_function(directions)
        scaled = directions * np.square(self.axes)
        return scaled / np.where(h > 0.0, h, 1.0)[:, None]

    def membership(self, points: np.ndarray) -> np.ndarray:
        return np.square(points / self.axes).sum(axis=1) <= 1.0

    def radial_function(self, directions: np.ndarray) -> np.ndarray:
        return 1.0 / np.sqrt(np.square(directions / self.axes).sum(axis=1))


@dataclass(frozen=True, eq=True)
class SymPolytope(Body):
    """Convex hull of the vertex list together with its reflection through 0."""

    vertices: Tuple[Tuple[float, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(float(c) for c in v) for v in self.vertices)
        if not rows or len({len(v) for v in rows}) != 1:
            raise DimensionMismatchError("vertices must be a non-empty list of equal-length points")
        if all(all(c == 0.0 for c in v) for v in rows):
            raise DegenerateBodyError("polytope vertices are all at the origin")
        object.__setattr__(self, "vertices", rows)

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    @property
    def kind(self) -> str:
        return "sym-polytope"

    def params(self) -> Dict[str, Any]:
        return {"vertices": [list(v) for v in self.vertices]}

    @cached_property
    def symmetrized(self) -> np.ndarray:
        base = np.asarray(self.vertices, dtype=float)
        return np.vstack([base, -base])

    @cached_property
    def facets(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Facet normals A and offsets b with A x <= b inside, or None if flat."""
        if self.dim == 1:
            extent = float(np.max(np.abs(self.symmetrized)))
            return np.array([[1.0], [-1.0]]), np.array([extent, extent])
        try:
            hull = ConvexHull(self.symmetrized)
        except QhullError:
            logger.warning(
                "Polytope is lower-dimensional; using linear-feasibility membership"
            )
            return None
        return hull.equations[:, :-1].copy(), -hull.equations[:, -1].copy()

    @cached_property
    def hull_vertices(self) -> np.ndarray:
        if self.dim == 1 or self.facets is None:
            return self.symmetrized
        return self.symmetrized[ConvexHull(self.symmetrized).vertices]

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        return np.max(directions @ self.symmetrized.T, axis=1)

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        return self.symmetrized[np.argmax(directions @ self.symmetrized.T, axis=1)]

    def membership(self, points: np.ndarray) -> np.ndarray:
        if self.facets is None:
            return np.array([self._feasible(p) for p in points], dtype=bool)
        normals, offsets = self.facets
        slack = points @ normals.T - offsets
        return np.all(slack <= MEMBERSHIP_TOLERANCE * np.maximum(offsets, 1.0), axis=1)

    def _feasible(self, point: np.ndarray) -> bool:
        """Is ``point`` a convex combination of the symmetrized vertices?"""
        count = len(self.symmetrized)
        equality = np.vstack([self.symmetrized.T, np.ones((1, count))])
        target = np.concatenate([point, [1.0]])
        result = linprog(
            np.zeros(count),
            A_eq=equality,
            b_eq=target,
            bounds=[(0.0, None)] * count,
            method="highs",
        )
        return bool(result.status == 0)

    def radial_function(self, directions: np.ndarray) -> np.ndarray:
        if self.facets is None:
            return super().radial_function(directions)
        normals, offsets = self.facets
        dots = directions @ normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(dots > 0.0, offsets / dots, math.inf)
        return np.min(ratios, axis=1)

    def vertex_angles(self) -> np.ndarray:
        """Sorted polar angles of the hull vertices (planar polytopes only)."""
        verts = self.hull_vertices
        return np.sort(np.mod(np.arctan2(verts[:, 1], verts[:, 0]), 2.0 * math.pi))


@dataclass(frozen=True, eq=True)
class Slab(Body):
    """Open truncated slab {|x_axis| < half_width, |x'| < cap}.

    With ``cap=None`` the slab is unbounded across its axis.
    """

    n: int
    half_width: float
    axis: int = 0
    cap: Optional[float] = None

    def __post_init__(self) -> None:
        if self.n < 1 or not 0 <= self.axis < self.n:
            raise DimensionMismatchError(f"invalid slab axis {self.axis} in dimension {self.n}")
        if not self.half_width > 0.0:
            raise DegenerateBodyError(f"slab half-width must be positive, got {self.half_width}")
        if self.cap is not None and not self.cap > 0.0:
            raise DegenerateBodyError(f"slab cap must be positive, got {self.cap}")

    @classmethod
    def truncated(cls, n: int, half_width: float, axis: int = 0) -> "Slab":
        """The slab with the cylinder cap |x'|^2 < 2n."""
        return cls(n=n, half_width=half_width, axis=axis, cap=math.sqrt(2.0 * n))

    @property
    def dim(self) -> int:
        return self.n

    @property
    def kind(self) -> str:
        return "slab"

    @property
    def is_bounded(self) -> bool:
        return self.cap is not None or self.n == 1

    def params(self) -> Dict[str, Any]:
        return {"axis": self.axis, "cap": self.cap, "half_width": self.half_width}

    def _split(self, vectors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        along = vectors[:, self.axis]
        across = np.delete(vectors, self.axis, axis=1)
        return along, np.linalg.norm(across, axis=1)

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        along, across = self._split(directions)
        cap = math.inf if self.cap is None else self.cap
        with np.errstate(invalid="ignore"):
            transverse = np.where(across > 0.0, cap * across, 0.0)
        return self.half_width * np.abs(along) + transverse

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        if self.cap is None:
            raise ValueError("an uncapped slab has no support points")
        along, across = self._split(directions)
        point = directions * (self.cap / np.where(across > 0.0, across, 1.0))[:, None]
        point[:, self.axis] = self.half_width * np.sign(along)
        return point

    def membership(self, points: np.ndarray) -> np.ndarray:
        along, across = self._split(points)
        inside = np.abs(along) < self.half_width
        if self.cap is not None:
            inside &= across < self.cap
        return inside

    def radial_function(self, directions: np.ndarray) -> np.ndarray:
        along, across = self._split(directions)
        cap = math.inf if self.cap is None else self.cap
        with np.errstate(divide="ignore"):
            return np.minimum(self.half_width / np.abs(along), cap / across)


@dataclass(frozen=True, eq=True)
class Halfspace(Body):
    """One-sided halfspace {<x, normal> <= offset}; not origin-symmetric."""

    normal: Tuple[float, ...]
    offset: float

    def __post_init__(self) -> None:
        vec = np.asarray(self.normal, dtype=float)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise DegenerateBodyError("halfspace normal must be non-zero")
        object.__setattr__(self, "normal", tuple(float(c) for c in vec / norm))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return len(self.normal)

    @property
    def kind(self) -> str:
        return "halfspace"

    @property
    def is_bounded(self) -> bool:
        return False

    @property
    def is_origin_symmetric(self) -> bool:
        return False

    @property
    def is_star_shaped(self) -> bool:
        return self.offset >= 0.0

    @property
    def unit_normal(self) -> np.ndarray:
        return np.asarray(self.normal)

    def params(self) -> Dict[str, Any]:
        return {"normal": list(self.normal), "offset": self.offset}

    def parallel_to(self, other: "Halfspace") -> bool:
        return bool(np.allclose(self.unit_normal, other.unit_normal, atol=1e-12, rtol=0.0))

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        along = directions @ self.unit_normal
        residual = np.linalg.norm(directions - along[:, None] * self.unit_normal, axis=1)
        scale = np.maximum(np.linalg.norm(directions, axis=1), 1.0)
        aligned = (residual <= 1e-12 * scale) & (along >= 0.0)
        return np.where(aligned, self.offset * along, math.inf)

    def membership(self, points: np.ndarray) -> np.ndarray:
        return points @ self.unit_normal <= self.offset

    def radial_function(self, directions: np.ndarray) -> np.ndarray:
        if not self.is_star_shaped:
            raise ValueError("halfspace with negative offset is not star-shaped")
        along = directions @ self.unit_normal
        with np.errstate(divide="ignore"):
            return np.where(along > 0.0, self.offset / along, math.inf)


def ball(n: int, radius: float) -> Ball:
    return Ball(n=n, radius=float(radius))


def box(*half_widths: float) -> Box:
    if len(half_widths) == 1 and not np.isscalar(half_widths[0]):
        return Box(tuple(half_widths[0]))  # type: ignore[arg-type]
    return Box(tuple(half_widths))


def ellipsoid(*semi_axes: float) -> Ellipsoid:
    if len(semi_axes) == 1 and not np.isscalar(semi_axes[0]):
        return Ellipsoid(tuple(semi_axes[0]))  # type: ignore[arg-type]
    return Ellipsoid(tuple(semi_axes))


def sym_polytope(vertices: Any) -> SymPolytope:
    return SymPolytope(tuple(tuple(v) for v in vertices))


def cross_polytope(n: int, radius: float = 1.0) -> SymPolytope:
    return SymPolytope(tuple(tuple(radius * e) for e in np.eye(n)))


def slab(n: int, half_width: float, axis: int = 0, cap: Optional[float] = None) -> Slab:
    return Slab(n=n, half_width=float(half_width), axis=axis, cap=cap)


def halfspace(normal: Any, offset: float) -> Halfspace:
    return Halfspace(tuple(normal), float(offset))
