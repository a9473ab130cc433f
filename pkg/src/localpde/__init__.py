"""Ornstein-Uhlenbeck Dirichlet problems and Hessian functionals on planar bodies."""

from typing import Optional, Union

from src.bodies.interfaces import Body
from src.bodies.serialization import body_to_spec
from src.localpde.convergence import (
    SplitDefect,
    convergence_ladder,
    orthogonal_split_defect,
    richardson,
)
from src.localpde.functional import (
    derivatives,
    energy,
    g_functional,
    kl_functional,
    kl_lower_bound,
    kl_lower_bound_mc,
)
from src.localpde.grid import MaskedGrid
from src.localpde.radial import (
    radial_functional,
    radial_functional_quadrature,
    radial_potential,
    radial_residual,
    radial_slope,
    radial_solution,
)
from src.localpde.slab import poincare_bound, slab_case, slab_experiment
from src.localpde.solver import (
    BOUNDARY_FAMILIES,
    BoundaryData,
    PdeSolution,
    boundary_family,
    ou_apply,
    solve_dirichlet,
)
from src.models.reports import PdeReport


def pde_report(
    body: Body,
    boundary: Union[str, BoundaryData] = "zero",
    h: float = 0.005,
    boundary_mode: str = "cut-cell",
    ladder_levels: int = 0,
    rtol: float = 1e-10,
    maxiter: int = 20000,
) -> PdeReport:
    """Solve Lu = 1, evaluate the functional and optionally attach a refinement ladder.

    The ladder starts at 4h so that its finest level is the reported solve.
    """
    solution = solve_dirichlet(body, 1.0, boundary, h, boundary_mode, rtol=rtol, maxiter=maxiter)
    functional = kl_functional(solution)
    ladder = None
    if ladder_levels >= 2:
        ladder = convergence_ladder(
            body,
            boundary,
            h * 2 ** (ladder_levels - 1),
            ladder_levels,
            boundary_mode,
            rtol=rtol,
            maxiter=maxiter,
        )
        functional.discretization_error = ladder.richardson_tau[-1]
    return PdeReport(
        body=body_to_spec(body),
        boundary=solution.boundary.name,
        boundary_mode=boundary_mode,
        h=h,
        functional=functional,
        solver=solution.stats,
        theorem_bound=1.0 / body.dim,
        ladder=ladder,
    )


__all__ = [
    "BOUNDARY_FAMILIES",
    "BoundaryData",
    "MaskedGrid",
    "PdeSolution",
    "SplitDefect",
    "boundary_family",
    "convergence_ladder",
    "derivatives",
    "energy",
    "g_functional",
    "kl_functional",
    "kl_lower_bound",
    "kl_lower_bound_mc",
    "orthogonal_split_defect",
    "ou_apply",
    "pde_report",
    "poincare_bound",
    "radial_functional",
    "radial_functional_quadrature",
    "radial_potential",
    "radial_residual",
    "radial_slope",
    "radial_solution",
    "richardson",
    "slab_case",
    "slab_experiment",
    "solve_dirichlet",
]
