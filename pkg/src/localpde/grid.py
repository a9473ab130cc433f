"""Masked tensor grids over symmetric bodies."""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from src.bodies.interfaces import Body
from src.core.errors import DegenerateBodyError, DimensionMismatchError

logger = logging.getLogger(__name__)

BISECTION_STEPS = 60
THETA_MIN = 1e-3


@dataclass(frozen=True)
class Crossings:
    """Where the segment from an unknown to an exterior axis neighbour leaves the body.

    ``rows`` index unknowns, ``theta`` is the crossing distance in units of the
    axis spacing and ``points`` the crossing locations.
    """

    rows: np.ndarray
    theta: np.ndarray
    points: np.ndarray


class MaskedGrid:
    """Nodes x = (i - M) h per axis, classified by a body's membership oracle.

    The mask requires both x and -x inside, so it is symmetric under x -> -x.
    """

    def __init__(
        self,
        body: Body,
        spacing: Union[float, Sequence[float]],
        boundary_mode: str = "cut-cell",
    ):
        if body.dim not in (2, 3):
            raise DimensionMismatchError(f"PDE grids support dimensions 2 and 3, got {body.dim}")
        if boundary_mode not in ("cut-cell", "nearest-node"):
            raise ValueError(f"unknown boundary mode '{boundary_mode}'")
        self.body = body
        self.dim = body.dim
        self.boundary_mode = boundary_mode
        if np.isscalar(spacing):
            spacing = [float(spacing)] * self.dim
        self.spacing = tuple(float(h) for h in spacing)
        if len(self.spacing) != self.dim or min(self.spacing) <= 0.0:
            raise ValueError(f"invalid grid spacing {spacing}")

        extents = body.support_function(np.eye(self.dim))
        if not np.all(np.isfinite(extents)):
            raise DegenerateBodyError("PDE domains must be bounded")
        self.half_counts = tuple(
            int(math.ceil(e / h)) + 2 for e, h in zip(extents, self.spacing)
        )
        self.shape = tuple(2 * m + 1 for m in self.half_counts)
        self.inside = self._build_mask()
        self.index = np.full(self.shape, -1, dtype=np.int64)
        self.index[self.inside] = np.arange(int(self.inside.sum()))
        logger.debug(
            f"Grid {self.shape} over {body.describe()}: {self.unknowns} unknowns "
            f"({boundary_mode})"
        )

    @property
    def h(self) -> float:
        return max(self.spacing)

    @property
    def unknowns(self) -> int:
        return int(self.inside.sum())

    def axis_coordinates(self, axis: int) -> np.ndarray:
        m = self.half_counts[axis]
        return (np.arange(2 * m + 1) - m) * self.spacing[axis]

    def node_points(self) -> np.ndarray:
        """All node coordinates, shape (*shape, dim)."""
        axes = [self.axis_coordinates(k) for k in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def _build_mask(self) -> np.ndarray:
        points = self.node_points().reshape(-1, self.dim)
        raw = self.body.membership(points).reshape(self.shape)
        mirrored = raw[(slice(None, None, -1),) * self.dim]
        if not np.array_equal(raw, mirrored):
            if not self.body.is_origin_symmetric:
                raise DegenerateBodyError(f"{self.body.kind} body gives an asymmetric grid mask")
            logger.warning("Membership mask is not symmetric at rounding level; symmetrizing")
        return raw & mirrored

    @cached_property
    def multi_index(self) -> np.ndarray:
        """Grid indices of the unknowns, shape (m, dim), in unknown order."""
        return np.argwhere(self.inside)

    @cached_property
    def points(self) -> np.ndarray:
        """Coordinates of the unknowns, shape (m, dim)."""
        offsets = np.asarray(self.half_counts)
        return (self.multi_index - offsets) * np.asarray(self.spacing)

    @cached_property
    def gauss_weight(self) -> np.ndarray:
        """exp(-|x|^2/2) h_1...h_d / (2 pi)^(d/2) at the unknowns."""
        volume = float(np.prod(self.spacing)) / (2.0 * math.pi) ** (0.5 * self.dim)
        return np.exp(-0.5 * np.einsum("ij,ij->i", self.points, self.points)) * volume

    def neighbour(self, axis: int, step: int) -> np.ndarray:
        """Unknown index of the axis neighbour of every unknown, -1 when exterior."""
        target = self.multi_index.copy()
        target[:, axis] += step
        return self.index[tuple(target.T)]

    def diagonal_neighbour(self, first: int, s1: int, second: int, s2: int) -> np.ndarray:
        target = self.multi_index.copy()
        target[:, first] += s1
        target[:, second] += s2
        return self.index[tuple(target.T)]

    @cached_property
    def boundary_adjacent(self) -> np.ndarray:
        """Unknowns with at least one exterior axis neighbour."""
        flags = np.zeros(self.unknowns, dtype=bool)
        for axis in range(self.dim):
            for step in (-1, 1):
                flags |= self.neighbour(axis, step) < 0
        return flags

    def crossings(self, axis: int, step: int) -> Crossings:
        """Boundary crossings towards exterior neighbours along ``step * e_axis``."""
        rows = np.flatnonzero(self.neighbour(axis, step) < 0)
        h = self.spacing[axis]
        start = self.points[rows]
        if self.boundary_mode == "nearest-node" or len(rows) == 0:
            theta = np.ones(len(rows))
        else:
            lo = np.zeros(len(rows))
            hi = np.ones(len(rows))
            direction = np.zeros(self.dim)
            direction[axis] = step * h
            for _ in range(BISECTION_STEPS):
                mid = 0.5 * (lo + hi)
                midpoints = start + mid[:, None] * direction
                inside = self.body.membership(midpoints) & self.body.membership(-midpoints)
                lo = np.where(inside, mid, lo)
                hi = np.where(inside, hi, mid)
            theta = np.clip(0.5 * (lo + hi), THETA_MIN, 1.0)
        points = start.copy()
        points[:, axis] += step * h * theta
        return Crossings(rows=rows, theta=theta, points=points)

    @cached_property
    def all_crossings(self) -> dict:
        return {
            (axis, step): self.crossings(axis, step)
            for axis in range(self.dim)
            for step in (-1, 1)
        }

    def scatter(self, values: np.ndarray, fill: float = 0.0) -> np.ndarray:
        """Unknown values placed on the full grid."""
        field = np.full(self.shape, fill, dtype=float)
        field[self.inside] = values
        return field

    def mirror(self, values: np.ndarray) -> np.ndarray:
        """values(-x) in unknown order."""
        field = self.scatter(values)
        flipped = field[(slice(None, None, -1),) * self.dim]
        return flipped[self.inside]

    def gauss_mass(self) -> float:
        """Grid quadrature of gamma_n(K)."""
        return float(self.gauss_weight.sum())

    def describe(self, tag: Optional[str] = None) -> str:
        label = f" {tag}" if tag else ""
        return f"grid{label} h={self.spacing} shape={self.shape} unknowns={self.unknowns}"
