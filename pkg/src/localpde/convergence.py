"""Mesh refinement studies and the radial/non-radial split on disks."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.bodies.interfaces import Body
from src.bodies.kinds import Ball
from src.localpde.functional import energy, kl_functional
from src.localpde.radial import radial_potential
from src.localpde.solver import BoundaryData, boundary_family, solve_dirichlet
from src.models.reports import ConvergenceLadder, ConvergenceLevel

logger = logging.getLogger(__name__)


def richardson(totals, ratio: float = 2.0):
    """Extrapolated limit and observed order from totals at h, h/2, h/4, ...

    With two levels the order is taken to be one.
    """
    if len(totals) < 2:
        return None, None
    if len(totals) == 2:
        order = 1.0
    else:
        t0, t1, t2 = totals[-3:]
        coarse, fine = t1 - t0, t2 - t1
        if fine == 0.0 or coarse == 0.0 or coarse * fine < 0.0:
            order = 1.0
        else:
            order = math.log(abs(coarse / fine), ratio)
            if order <= 0.0:
                order = 1.0
    limit = totals[-1] + (totals[-1] - totals[-2]) / (ratio**order - 1.0)
    return limit, order


def convergence_ladder(
    body: Body,
    boundary: Union[str, BoundaryData] = "zero",
    h0: float = 0.04,
    levels: int = 3,
    boundary_mode: str = "cut-cell",
    rtol: float = 1e-10,
    maxiter: int = 20000,
) -> ConvergenceLadder:
    """Functional totals at h0, h0/2, ... with Richardson error estimates."""
    if levels < 2:
        raise ValueError("a convergence ladder needs at least two levels")
    rungs = []
    for level in range(levels):
        h = h0 / 2**level
        solution = solve_dirichlet(
            body, 1.0, boundary, h, boundary_mode, rtol=rtol, maxiter=maxiter
        )
        report = kl_functional(solution)
        rungs.append(
            ConvergenceLevel(
                h=h,
                total=report.total,
                interior_only_total=report.interior_only_total,
                unknowns=solution.stats.unknowns,
            )
        )
        logger.debug(f"Ladder level h={h}: total={report.total:.6f}")
    totals = [r.total for r in rungs]
    limit, order = richardson(totals)
    return ConvergenceLadder(
        levels=rungs,
        richardson_tau=[abs(t - limit) for t in totals],
        observed_order=order,
        extrapolated_total=limit,
    )


@dataclass(frozen=True)
class SplitDefect:
    total: float
    radial_part: float
    remainder: float

    @property
    def defect(self) -> float:
        return self.total - self.radial_part - self.remainder

    @property
    def relative_defect(self) -> float:
        return abs(self.defect) / self.total if self.total else math.inf


def orthogonal_split_defect(
    rho: float = 1.0,
    boundary: Union[str, BoundaryData] = "cos",
    h: float = 0.01,
    rtol: float = 1e-10,
    maxiter: int = 20000,
    body: Optional[Body] = None,
) -> SplitDefect:
    """F(u) against F(u_0) + F(v) for u on the disk, u_0 its radial part and v = u - u_0."""
    body = body if body is not None else Ball(n=2, radius=rho)
    data = boundary_family(boundary)
    solution = solve_dirichlet(body, 1.0, data, h, rtol=rtol, maxiter=maxiter)
    grid = solution.grid
    n = grid.dim
    centre = solution.u[grid.index[tuple(grid.half_counts)]]

    def radial_part(points: np.ndarray) -> np.ndarray:
        return centre + radial_potential(n, np.linalg.norm(points, axis=1))

    def remainder_boundary(points: np.ndarray) -> np.ndarray:
        return data(points) - radial_part(points)

    u0 = radial_part(grid.points)
    split = SplitDefect(
        total=energy(grid, solution.u, data),
        radial_part=energy(grid, u0, radial_part),
        remainder=energy(grid, solution.u - u0, remainder_boundary),
    )
    logger.debug(
        f"Orthogonal split on {body.describe()} ({data.name}): defect {split.defect:.3e}"
    )
    return split
