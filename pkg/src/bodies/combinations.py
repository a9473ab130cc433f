"""Derived bodies: dilates, Minkowski combinations, geometric means, unions.

Minkowski combinations and geometric means only know their support function.
Membership is decided on a deterministic direction net; for Minkowski
combinations a vectorized projected-gradient descent on the sphere refines the
net minimum of h(theta) - <x, theta> so that points just outside are caught.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.spatial import HalfspaceIntersection

from src.bodies.interfaces import MEMBERSHIP_TOLERANCE, Body
from src.bodies.kinds import Ball, Box, Halfspace
from src.bodies.nets import default_net_size, direction_net, net_resolution
from src.core.errors import DegenerateBodyError, DimensionMismatchError

logger = logging.getLogger(__name__)

POINT_BLOCK = 1024
REFINE_STEPS = 40


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise DegenerateBodyError(f"lambda must lie in the open interval (0, 1), got {lam}")
    return lam


def _check_pair(first: Body, second: Body) -> None:
    if first.dim != second.dim:
        raise DimensionMismatchError(
            f"cannot combine bodies of dimension {first.dim} and {second.dim}"
        )


@dataclass(frozen=True, eq=True)
class Dilate(Body):
    """t K for t > 0."""

    factor: float
    child: Body

    def __post_init__(self) -> None:
        if not self.factor > 0.0 or math.isinf(self.factor):
            raise DegenerateBodyError(f"dilation factor must be positive, got {self.factor}")

    @property
    def dim(self) -> int:
        return self.child.dim

    @property
    def kind(self) -> str:
        return "dilate"

    @property
    def is_origin_symmetric(self) -> bool:
        return self.child.is_origin_symmetric

    @property
    def is_convex(self) -> bool:
        return self.child.is_convex

    @property
    def is_star_shaped(self) -> bool:
        return self.child.is_star_shaped

    def params(self) -> Dict[str, Any]:
        return {"factor": self.factor}

    def children(self) -> Tuple[Body, ...]:
        return (self.child,)

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        return self.factor * self.child.support_function(directions)

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        return self.factor * self.child.support_point(directions)

    def membership(self, points: np.ndarray) -> np.ndarray:
        return self.child.membership(points / self.factor)

    def radial_function(self, directions: np.ndarray) -> np.ndarray:
        return self.factor * self.child.radial_function(directions)


@dataclass(frozen=True, eq=True)
class MinkowskiCombo(Body):
    """lambda K + (1 - lambda) L."""

    lam: float
    first: Body
    second: Body
    net_size: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", _check_lambda(self.lam))
        _check_pair(self.first, self.second)
        if not (self.first.is_convex and self.second.is_convex):
            raise ValueError("Minkowski combinations require convex operands")
        if not self.net_size:
            object.__setattr__(self, "net_size", default_net_size(self.first.dim))

    @property
    def dim(self) -> int:
        return self.first.dim

    @property
    def kind(self) -> str:
        return "minkowski-combo"

    @property
    def is_origin_symmetric(self) -> bool:
        return self.first.is_origin_symmetric and self.second.is_origin_symmetric

    @property
    def approximate(self) -> bool:
        return self.reduced() is None

    def params(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {"lambda": self.lam}
        if self.net_size != default_net_size(self.dim):
            params["net_size"] = self.net_size
        return params

    def children(self) -> Tuple[Body, ...]:
        return (self.first, self.second)

    @property
    def resolution(self) -> float:
        return net_resolution(self.dim, self.net_size)

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        return self.lam * self.first.support_function(directions) + (
            1.0 - self.lam
        ) * self.second.support_function(directions)

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        return self.lam * self.first.support_point(directions) + (
            1.0 - self.lam
        ) * self.second.support_point(directions)

    def reduced(self) -> Optional[Body]:
        """An exact primitive with the same support function, when one exists."""
        return self._reduction

    @cached_property
    def _reduction(self) -> Optional[Body]:
        first, second, lam = self.first, self.second, self.lam
        if first == second:
            return first
        if isinstance(first, Ball) and isinstance(second, Ball):
            return Ball(first.n, lam * first.radius + (1.0 - lam) * second.radius)
        if isinstance(first, Box) and isinstance(second, Box):
            widths = lam * first.widths + (1.0 - lam) * second.widths
            return Box(tuple(float(w) for w in widths))
        if isinstance(first, Halfspace) and isinstance(second, Halfspace):
            if first.parallel_to(second):
                return Halfspace(first.normal, lam * first.offset + (1.0 - lam) * second.offset)
        return None

    @cached_property
    def _net(self) -> Tuple[np.ndarray, np.ndarray]:
        net = direction_net(self.dim, self.net_size)
        values = self.support_function(net)
        if not np.all(np.isfinite(values)):
            raise ValueError("net membership needs bounded operands")
        return net, values

    def membership(self, points: np.ndarray) -> np.ndarray:
        exact = self.reduced()
        if exact is not None:
            return exact.membership(points)
        net, values = self._net
        inside = np.empty(len(points), dtype=bool)
        scale = MEMBERSHIP_TOLERANCE * max(float(values.max()), 1.0)
        for start in range(0, len(points), POINT_BLOCK):
            block = points[start : start + POINT_BLOCK]
            gaps = values[None, :] - block @ net.T
            best = np.argmin(gaps, axis=1)
            lowest = gaps[np.arange(len(block)), best]
            # the gap is Lipschitz in theta with constant at most |x| + max h,
            # so only points this close to the boundary can still be outside
            lipschitz = np.linalg.norm(block, axis=1) + values.max()
            near = (lowest >= -scale) & (lowest < 2.0 * lipschitz * self.resolution)
            candidate = lowest >= -scale
            if np.any(near) and self._refinable:
                refined = self._refine(block[near], net[best[near]])
                candidate[np.flatnonzero(near)] = refined >= -scale
            inside[start : start + POINT_BLOCK] = candidate
        return inside

    @cached_property
    def _refinable(self) -> bool:
        first_direction = direction_net(self.dim, self.net_size)[:1]
        try:
            self.support_point(first_direction)
        except (NotImplementedError, ValueError):
            logger.warning(f"{self.describe()} has no support points; membership is net-only")
            return False
        return True

    def _refine(self, points: np.ndarray, seeds: np.ndarray) -> np.ndarray:
        """Smallest h(theta) - <x, theta> found from two starts per point."""
        norms = np.linalg.norm(points, axis=1, keepdims=True)
        radial_seed = np.where(norms > 0.0, points / np.where(norms > 0.0, norms, 1.0), seeds)
        lowest = np.full(len(points), math.inf)
        for start in (seeds, radial_seed):
            theta = start.copy()
            step = 2.0 * max(self.resolution, 1e-3)
            for _ in range(REFINE_STEPS):
                gap = self.support_function(theta) - np.einsum("ij,ij->i", points, theta)
                lowest = np.minimum(lowest, gap)
                gradient = self.support_point(theta) - points
                tangent = gradient - np.einsum("ij,ij->i", gradient, theta)[:, None] * theta
                size = np.linalg.norm(tangent, axis=1, keepdims=True)
                move = np.where(size > 0.0, tangent / np.where(size > 0.0, size, 1.0), 0.0)
                theta = theta - step * move
                theta /= np.linalg.norm(theta, axis=1, keepdims=True)
                step *= 0.75
            gap = self.support_function(theta) - np.einsum("ij,ij->i", points, theta)
            lowest = np.minimum(lowest, gap)
        return lowest


@dataclass(frozen=True, eq=True)
class GeometricMean(Body):
    """K^lambda L^(1-lambda): intersection of {<x, theta> <= h_K^lambda h_L^(1-lambda)}.

    Membership is the finite intersection over the direction net, which is an
    outer approximation: measures of this body are upper bounds. The support
    function is that of the same net polytope, read off its vertices, so it is
    sublinear; h_K^lambda h_L^(1-lambda) itself generally is not.
    """

    lam: float
    first: Body
    second: Body
    net_size: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", _check_lambda(self.lam))
        _check_pair(self.first, self.second)
        for operand in (self.first, self.second):
            if not (operand.is_origin_symmetric and operand.is_convex):
                raise ValueError("geometric means require symmetric convex operands")
        if not self.net_size:
            object.__setattr__(self, "net_size", default_net_size(self.first.dim))
        net = direction_net(self.dim, self.net_size)
        if np.min(self.first.support_function(net)) <= 0.0 or np.min(
            self.second.support_function(net)
        ) <= 0.0:
            raise DegenerateBodyError("geometric mean needs strictly positive support")

    @property
    def dim(self) -> int:
        return self.first.dim

    @property
    def kind(self) -> str:
        return "geometric-mean"

    @property
    def approximate(self) -> bool:
        return True

    def params(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {"lambda": self.lam}
        if self.net_size != default_net_size(self.dim):
            params["net_size"] = self.net_size
        return params

    def children(self) -> Tuple[Body, ...]:
        return (self.first, self.second)

    @property
    def resolution(self) -> float:
        return net_resolution(self.dim, self.net_size)

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        """Support of the net polytope, max of <v, theta> over its vertices."""
        if self.dim == 1:
            return self._net[1][0] * np.abs(directions[:, 0])
        return np.max(directions @ self._vertices.T, axis=1)

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        if self.dim == 1:
            return self._net[1][0] * np.sign(directions)
        return self._vertices[np.argmax(directions @ self._vertices.T, axis=1)]

    @cached_property
    def _net(self) -> Tuple[np.ndarray, np.ndarray]:
        net = direction_net(self.dim, self.net_size)
        values = np.power(self.first.support_function(net), self.lam) * np.power(
            self.second.support_function(net), 1.0 - self.lam
        )
        return net, values

    @cached_property
    def _vertices(self) -> np.ndarray:
        net, values = self._net
        halfspaces = np.hstack([net, -values[:, None]])
        vertices = HalfspaceIntersection(halfspaces, np.zeros(self.dim)).intersections
        logger.debug(f"{self.describe()}: {len(vertices)} vertices from {len(net)} halfspaces")
        return vertices

    def membership(self, points: np.ndarray) -> np.ndarray:
        net, values = self._net
        inside = np.empty(len(points), dtype=bool)
        tol = MEMBERSHIP_TOLERANCE * max(float(values.max()), 1.0)
        for start in range(0, len(points), POINT_BLOCK):
            block = points[start : start + POINT_BLOCK]
            excess = block @ net.T - values[None, :]
            inside[start : start + POINT_BLOCK] = np.max(excess, axis=1) <= tol
        return inside


@dataclass(frozen=True, eq=True)
class Union(Body):
    """Finite union of star-shaped bodies; star-shaped but generally not convex."""

    members: Tuple[Body, ...]

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if not members:
            raise DegenerateBodyError("a union needs at least one member")
        if len({m.dim for m in members}) != 1:
            raise DimensionMismatchError("union members must share the dimension")
        if not all(m.is_star_shaped for m in members):
            raise ValueError("union members must be star-shaped")
        object.__setattr__(self, "members", members)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def kind(self) -> str:
        return "union"

    @property
    def is_origin_symmetric(self) -> bool:
        return all(m.is_origin_symmetric for m in self.members)

    @property
    def is_convex(self) -> bool:
        return len(self.members) == 1 and self.members[0].is_convex

    def params(self) -> Dict[str, Any]:
        return {}

    def children(self) -> Tuple[Body, ...]:
        return self.members

    def support_function(self, directions: np.ndarray) -> np.ndarray:
        return np.max([m.support_function(directions) for m in self.members], axis=0)

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        values = np.array([m.support_function(directions) for m in self.members])
        points = np.array([m.support_point(directions) for m in self.members])
        best = np.argmax(values, axis=0)
        return points[best, np.arange(len(directions))]

    def membership(self, points: np.ndarray) -> np.ndarray:
        inside = np.zeros(len(points), dtype=bool)
        for member in self.members:
            inside |= member.membership(points)
        return inside

    def radial_function(self, directions: np.ndarray) -> np.ndarray:
        return np.max([m.radial_function(directions) for m in self.members], axis=0)


def dilate(factor: float, body: Body) -> Dilate:
    return Dilate(float(factor), body)


def minkowski_combine(lam: float, first: Body, second: Body, net_size: int = 0) -> MinkowskiCombo:
    return MinkowskiCombo(float(lam), first, second, net_size)


def geometric_mean(lam: float, first: Body, second: Body, net_size: int = 0) -> GeometricMean:
    return GeometricMean(float(lam), first, second, net_size)


def union(*members: Body) -> Union:
    return Union(tuple(members))
