"""Gaussian Hessian functionals of discrete solutions.

Derivatives use three-point formulas on possibly unequal arms: an arm that
leaves the body ends at the boundary crossing and uses the boundary value
there. Quadrature uses the grid's Gaussian node weights normalized to
gamma(K), the same weights the stiffness matrix is built from.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from src.bodies.interfaces import Body
from src.core.gaussmeasure import monte_carlo_integrals
from src.core.special import ball_second_moment, psi_n_inv
from src.localpde.grid import MaskedGrid
from src.localpde.solver import PdeSolution
from src.models.estimates import SamplingBudget
from src.models.reports import FunctionalReport

logger = logging.getLogger(__name__)

BoundaryValues = Callable[[np.ndarray], np.ndarray]


@dataclass
class Derivatives:
    gradient: np.ndarray
    hessian: np.ndarray
    mixed_fallback: np.ndarray


def _arm(grid: MaskedGrid, values: np.ndarray, boundary: BoundaryValues, axis: int, step: int):
    """Neighbour value and arm length along ``step * e_axis`` for every unknown."""
    neighbour = grid.neighbour(axis, step)
    far = values[neighbour]
    length = np.full(grid.unknowns, grid.spacing[axis])
    cut = grid.all_crossings[(axis, step)]
    if len(cut.rows):
        far[cut.rows] = boundary(cut.points)
        length[cut.rows] = cut.theta * grid.spacing[axis]
    return far, length


def _mixed(grid: MaskedGrid, values: np.ndarray, first: int, second: int):
    h = grid.spacing[first] * grid.spacing[second]
    corners = {
        (s1, s2): grid.diagonal_neighbour(first, s1, second, s2)
        for s1 in (-1, 1)
        for s2 in (-1, 1)
    }
    centered = np.all([c >= 0 for c in corners.values()], axis=0)
    estimate = (
        values[corners[(1, 1)]]
        - values[corners[(1, -1)]]
        - values[corners[(-1, 1)]]
        + values[corners[(-1, -1)]]
    ) / (4.0 * h)

    quadrant_sum = np.zeros(grid.unknowns)
    quadrant_count = np.zeros(grid.unknowns)
    for (s1, s2), corner in corners.items():
        along_first = grid.neighbour(first, s1)
        along_second = grid.neighbour(second, s2)
        usable = (corner >= 0) & (along_first >= 0) & (along_second >= 0)
        quadrant = (
            s1
            * s2
            * (values[corner] - values[along_first] - values[along_second] + values)
            / h
        )
        quadrant_sum += np.where(usable, quadrant, 0.0)
        quadrant_count += usable
    fallback = np.divide(
        quadrant_sum, quadrant_count, out=np.zeros(grid.unknowns), where=quadrant_count > 0
    )
    return np.where(centered, estimate, fallback), ~centered


def derivatives(grid: MaskedGrid, values: np.ndarray, boundary: BoundaryValues) -> Derivatives:
    """Gradient and Hessian of a field given in unknown order with boundary values."""
    values = np.asarray(values, dtype=float)
    m, d = grid.unknowns, grid.dim
    gradient = np.zeros((m, d))
    hessian = np.zeros((m, d, d))
    fallback = np.zeros(m, dtype=bool)
    for axis in range(d):
        u_plus, b = _arm(grid, values, boundary, axis, 1)
        u_minus, a = _arm(grid, values, boundary, axis, -1)
        gradient[:, axis] = (a**2 * u_plus - b**2 * u_minus + (b**2 - a**2) * values) / (
            a * b * (a + b)
        )
        hessian[:, axis, axis] = 2.0 * ((u_plus - values) / b - (values - u_minus) / a) / (a + b)
    for first in range(d):
        for second in range(first + 1, d):
            mixed, flags = _mixed(grid, values, first, second)
            hessian[:, first, second] = mixed
            hessian[:, second, first] = mixed
            fallback |= flags
    return Derivatives(gradient=gradient, hessian=hessian, mixed_fallback=fallback)


def _normalized_weights(grid: MaskedGrid, select: Optional[np.ndarray] = None) -> np.ndarray:
    weights = grid.gauss_weight if select is None else np.where(select, grid.gauss_weight, 0.0)
    return weights / weights.sum()


def energy(grid: MaskedGrid, values: np.ndarray, boundary: BoundaryValues) -> float:
    """Normalized integral of |Hess u|^2 + |grad u|^2 against gamma_K."""
    d = derivatives(grid, values, boundary)
    density = np.einsum("mij,mij->m", d.hessian, d.hessian) + np.einsum(
        "mi,mi->m", d.gradient, d.gradient
    )
    return float(_normalized_weights(grid) @ density)


def kl_functional(solution: PdeSolution) -> FunctionalReport:
    """Hessian functional of a solution of Lu = 1 and its proof-side decomposition."""
    grid = solution.grid
    n = grid.dim
    x = grid.points
    d = derivatives(grid, solution.u, solution.boundary)
    weights = _normalized_weights(grid)

    hessian_sq = np.einsum("mij,mij->m", d.hessian, d.hessian)
    gradient_sq = np.einsum("mi,mi->m", d.gradient, d.gradient)
    laplacian = np.trace(d.hessian, axis1=1, axis2=2)
    identity = np.eye(n)
    traceless = d.hessian - (laplacian / n)[:, None, None] * identity
    traceless_sq = np.einsum("mij,mij->m", traceless, traceless)
    shifted = d.hessian - identity / n
    shifted_sq = np.einsum("mij,mij->m", shifted, shifted)
    drift = np.einsum("mi,mi->m", x, d.gradient)
    radius_sq = np.einsum("mi,mi->m", x, x)

    hessian_term = float(weights @ hessian_sq)
    gradient_term = float(weights @ gradient_sq)
    total_density = hessian_sq + gradient_sq

    shifted_gradient = d.gradient - x / n
    means = weights @ shifted_gradient
    variance_sum = float(np.sum(weights @ (shifted_gradient - means) ** 2))

    mass = grid.gauss_mass()
    rho = psi_n_inv(min(mass, 1.0 - 1e-15), n)
    ball_bound = ball_second_moment(rho, n) / (n**2 * mass) + 1.0 / n

    interior = ~grid.boundary_adjacent
    if interior.any():
        interior_total = float(_normalized_weights(grid, interior) @ total_density)
    else:
        interior_total = math.nan

    report = FunctionalReport(
        h=grid.h,
        dim=n,
        hessian_term=hessian_term,
        gradient_term=gradient_term,
        total=hessian_term + gradient_term,
        traceless_term=float(weights @ traceless_sq),
        laplacian_term=float(weights @ laplacian**2) / n,
        drift_term=2.0 / n * float(weights @ drift),
        constant=1.0 / n,
        hessian_minus_r_term=float(weights @ shifted_sq),
        variance_sum=variance_sum,
        chain_bound=float(weights @ (2.0 * gradient_sq + radius_sq / n**2)) + 1.0 / n,
        ball_bound=ball_bound,
        g_value=float(weights @ ((1.0 + drift) ** 2 / n + gradient_sq)),
        interior_only_total=interior_total,
        boundary_adjacent_nodes=int(grid.boundary_adjacent.sum()),
        mixed_fallback_nodes=int(d.mixed_fallback.sum()),
        trace_identity_defect=float(
            np.max(np.abs(hessian_sq - traceless_sq - laplacian**2 / n), initial=0.0)
        ),
    )
    logger.debug(
        f"Functional on {grid.describe(solution.boundary.name)}: total={report.total:.6f}, "
        f"chain bound={report.chain_bound:.6f}"
    )
    return report


def g_functional(solution: PdeSolution) -> float:
    """Normalized integral of (1/n)(1 + x.grad u)^2 + |grad u|^2 against gamma_K."""
    return kl_functional(solution).g_value


def kl_lower_bound(body: Body, h: float = 0.02, grid: Optional[MaskedGrid] = None) -> float:
    """Grid quadrature of the normalized integral of 1/(|x|^2 + n) over gamma_K."""
    grid = grid if grid is not None else MaskedGrid(body, h)
    radius_sq = np.einsum("mi,mi->m", grid.points, grid.points)
    return float(_normalized_weights(grid) @ (1.0 / (radius_sq + grid.dim)))


def kl_lower_bound_mc(body: Body, budget: SamplingBudget) -> Tuple[float, float]:
    """Monte Carlo value and standard error of the same normalized integral, any dimension."""
    n = body.dim
    joint = monte_carlo_integrals(
        body, budget, {"inverse": lambda x: 1.0 / (np.einsum("ij,ij->i", x, x) + n)}
    )
    p, q = joint.values
    ratio = q / p
    gradient = np.array([-q / p**2, 1.0 / p])
    return float(ratio), float(math.sqrt(max(gradient @ joint.covariance @ gradient, 0.0)))
