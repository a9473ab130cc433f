"""Dirichlet problems for the Ornstein-Uhlenbeck operator on masked grids.

The operator is discretized in divergence form, Lu = (1/w) div(w grad u) with
w = exp(-|x|^2/2), so the assembled system -w L is symmetric positive definite.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Union

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg

from src.bodies.interfaces import Body
from src.core.errors import ConvergenceError
from src.localpde.grid import MaskedGrid
from src.models.reports import SolverStats

logger = logging.getLogger(__name__)

FieldFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet data g evaluated on boundary points of shape (m, dim)."""

    name: str
    func: FieldFunction
    even: bool = True

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(points), dtype=float)


def _zero(points: np.ndarray) -> np.ndarray:
    return np.zeros(len(points))


def _cos(points: np.ndarray) -> np.ndarray:
    return np.prod(np.cos(points[:, :2]), axis=1)


def _quadratic(points: np.ndarray) -> np.ndarray:
    return points[:, 0] ** 2 - 0.5 * points[:, 1] ** 2


BOUNDARY_FAMILIES: Dict[str, BoundaryData] = {
    "zero": BoundaryData("zero", _zero),
    "cos": BoundaryData("cos", _cos),
    "quadratic": BoundaryData("quadratic", _quadratic),
}


def boundary_family(boundary: Union[str, BoundaryData]) -> BoundaryData:
    if isinstance(boundary, BoundaryData):
        return boundary
    try:
        return BOUNDARY_FAMILIES[boundary]
    except KeyError:
        raise ValueError(
            f"unknown boundary data '{boundary}', expected one of {sorted(BOUNDARY_FAMILIES)}"
        ) from None


@dataclass
class PdeSolution:
    """Discrete solution in unknown order together with everything needed to differentiate it."""

    grid: MaskedGrid
    u: np.ndarray
    boundary: BoundaryData
    stats: SolverStats

    @property
    def residual_linf(self) -> float:
        return self.stats.residual_linf

    def boundary_values(self, points: np.ndarray) -> np.ndarray:
        return self.boundary(points)

    def as_field(self, fill: float = np.nan) -> np.ndarray:
        return self.grid.scatter(self.u, fill=fill)


def ou_apply(u: np.ndarray, grid: MaskedGrid) -> np.ndarray:
    """Divergence-form Lu on the full grid; the outermost layer is left at zero.

    ``u`` may be given on the full grid or in unknown order (zero outside).
    """
    field = np.asarray(u, dtype=float)
    if field.shape == (grid.unknowns,):
        field = grid.scatter(field)
    if field.shape != grid.shape:
        raise ValueError(f"field of shape {field.shape} does not fit grid {grid.shape}")

    points = grid.node_points()
    squared = np.sum(points**2, axis=-1)
    core = (slice(1, -1),) * grid.dim
    total = np.zeros(grid.shape)
    for axis, h in enumerate(grid.spacing):
        lower = [slice(None)] * grid.dim
        lower[axis] = slice(0, -1)
        coordinate = points[..., axis]
        half_squared = squared - coordinate**2 + (coordinate + 0.5 * h) ** 2
        flux = np.exp(-0.5 * half_squared)[tuple(lower)] * np.diff(field, axis=axis) / h**2
        divergence = np.diff(flux, axis=axis)
        window = [slice(1, -1)] * grid.dim
        window[axis] = slice(None)
        total[core] += divergence[tuple(window)]
    total[core] /= np.exp(-0.5 * squared[core])
    return total


def _evaluate(rhs: Union[float, FieldFunction], points: np.ndarray) -> np.ndarray:
    if callable(rhs):
        return np.asarray(rhs(points), dtype=float)
    return np.full(len(points), float(rhs))


def assemble(
    grid: MaskedGrid, rhs: Union[float, FieldFunction], boundary: BoundaryData
) -> tuple:
    """Matrix A and vector b of A u = b, the weighted form of Lu = rhs."""
    points = grid.points
    size = grid.unknowns
    weight = np.exp(-0.5 * np.einsum("ij,ij->i", points, points))
    b = -weight * _evaluate(rhs, points)
    diagonal = np.zeros(size)
    rows, cols, data = [], [], []
    for axis, h in enumerate(grid.spacing):
        for step in (-1, 1):
            half = points.copy()
            half[:, axis] += 0.5 * step * h
            w_half = np.exp(-0.5 * np.einsum("ij,ij->i", half, half)) / h**2
            neighbour = grid.neighbour(axis, step)
            linked = np.flatnonzero(neighbour >= 0)
            rows.append(linked)
            cols.append(neighbour[linked])
            data.append(-w_half[linked])
            diagonal[linked] += w_half[linked]

            cut = grid.all_crossings[(axis, step)]
            scaled = w_half[cut.rows] / cut.theta
            diagonal[cut.rows] += scaled
            b[cut.rows] += scaled * boundary(cut.points)

    off = sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    return off + sparse.diags(diagonal), b


def solve_dirichlet(
    body: Body,
    rhs: Union[float, FieldFunction] = 1.0,
    boundary: Union[str, BoundaryData] = "zero",
    h: float = 0.02,
    boundary_mode: str = "cut-cell",
    rtol: float = 1e-10,
    maxiter: int = 20000,
    grid: Optional[MaskedGrid] = None,
) -> PdeSolution:
    """Solve Lu = rhs in the body with u = boundary on its boundary.

    The right-hand side must be even for the symmetrization step to apply;
    every forcing used in the laboratory is.
    """
    if not (body.is_origin_symmetric and body.is_convex):
        raise ValueError(f"PDE solves need an origin-symmetric convex body, got {body.kind}")
    data = boundary_family(boundary)
    grid = grid if grid is not None else MaskedGrid(body, h, boundary_mode)
    if grid.unknowns == 0:
        raise ValueError(f"grid spacing {h} leaves no interior nodes in {body.describe()}")

    matrix, b = assemble(grid, rhs, data)
    preconditioner = sparse.diags(1.0 / matrix.diagonal())
    iterations = 0

    def count(_: np.ndarray) -> None:
        nonlocal iterations
        iterations += 1

    u, info = cg(matrix, b, rtol=rtol, atol=0.0, maxiter=maxiter, M=preconditioner, callback=count)
    if info != 0:
        raise ConvergenceError(
            f"CG did not reach rtol={rtol} within {maxiter} iterations on {grid.describe()}"
        )

    residual = matrix @ u - b
    norm_b = float(np.linalg.norm(b))
    relative = float(np.linalg.norm(residual)) / norm_b if norm_b > 0.0 else 0.0
    evenness = float(np.max(np.abs(u - grid.mirror(u)))) if grid.unknowns else 0.0
    if data.even:
        u = 0.5 * (u + grid.mirror(u))

    stats = SolverStats(
        iterations=iterations,
        residual_linf=float(np.max(np.abs(residual))),
        relative_residual=relative,
        evenness_defect=evenness,
        unknowns=grid.unknowns,
    )
    logger.debug(
        f"Solved {grid.describe(data.name)} in {iterations} CG steps, "
        f"relative residual {relative:.2e}, evenness defect {evenness:.2e}"
    )
    return PdeSolution(grid=grid, u=u, boundary=data, stats=stats)
