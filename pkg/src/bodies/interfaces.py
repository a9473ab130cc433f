"""Interfaces for the pluggable body system.

A body is described by oracles rather than by a list of points: a support
function, a membership test and a radial function. Concrete kinds override the
oracles they can evaluate exactly; the base class supplies the rest.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np

from src.core.errors import DimensionMismatchError

RADIAL_TOLERANCE = 1e-10
MEMBERSHIP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Direction:
    """A unit vector in R^n."""

    components: Tuple[float, ...]

    def __post_init__(self) -> None:
        norm = math.sqrt(sum(c * c for c in self.components))
        if not self.components or abs(norm - 1.0) > 1e-12:
            raise ValueError(f"direction must have unit norm, got |theta| = {norm}")

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "Direction":
        arr = np.asarray(vector, dtype=float)
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(tuple(float(c) for c in arr / norm))

    @property
    def dim(self) -> int:
        return len(self.components)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)


def as_rows(values: Union[Sequence[float], np.ndarray], dim: int) -> Tuple[np.ndarray, bool]:
    """Coerce a point or a stack of points to shape (m, dim).

    Returns the array and whether the input was a single vector.
    """
    arr = np.asarray(values, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionMismatchError(
            f"expected vectors of dimension {dim}, got array of shape {np.shape(values)}"
        )
    return arr, single


class Body(ABC):
    """Interface for a set in R^n given by oracles."""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Ambient dimension n."""
        pass

    @property
    @abstractmethod
    def kind(self) -> str:
        """Serialized kind name, e.g. 'ball'."""
        pass

    @abstractmethod
    def support_function(self, directions: np.ndarray) -> np.ndarray:
        """
        Evaluate h(theta) = sup_{y in K} <y, theta> on the rows of ``directions``.

        Rows need not be unit vectors: the homogeneous extension is returned.
        """
        pass

    @abstractmethod
    def membership(self, points: np.ndarray) -> np.ndarray:
        """Boolean membership for each row of ``points`` (shape (m, n))."""
        pass

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """Serializable parameters in canonical key order."""
        pass

    def children(self) -> Tuple["Body", ...]:
        return ()

    @property
    def is_origin_symmetric(self) -> bool:
        return True

    @property
    def is_convex(self) -> bool:
        return True

    @property
    def is_star_shaped(self) -> bool:
        return True

    @property
    def is_bounded(self) -> bool:
        return all(child.is_bounded for child in self.children())

    @property
    def approximate(self) -> bool:
        """True when membership is decided on a direction net."""
        return any(child.approximate for child in self.children())

    def support_point(self, directions: np.ndarray) -> np.ndarray:
        """A maximizer of <y, theta> over the body for each row."""
        raise NotImplementedError(f"{self.kind} bodies do not expose support points")

    def radial_function(self, directions: np.ndarray) -> np.ndarray:
        """
        Radial function by bisection on the membership oracle.

        The support value bounds the radial value for bodies containing the
        origin, which gives the initial bracket.
        """
        if not self.is_star_shaped:
            raise ValueError(f"{self.kind} body is not star-shaped")
        dirs = np.asarray(directions, dtype=float)
        norms = np.linalg.norm(dirs, axis=1)
        units = dirs / norms[:, None]
        hi = self.support_function(units) * (1.0 + 1e-9) + 1e-12
        if np.any(~np.isfinite(hi)):
            raise ValueError(f"radial bisection needs a bounded {self.kind} body")
        lo = np.zeros_like(hi)
        while np.any(hi - lo > RADIAL_TOLERANCE * np.maximum(hi, 1.0)):
            mid = 0.5 * (lo + hi)
            inside = self.membership(units * mid[:, None])
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return lo / norms

    def describe(self) -> str:
        parts = ", ".join(f"{key}={value}" for key, value in self.params().items())
        return f"{self.kind}(dim={self.dim}{', ' + parts if parts else ''})"
