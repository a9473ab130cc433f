"""Thin truncated slabs where dropping the traceless Hessian loses the gain.

On S_eps = {|x_1| < eps, |x'|^2 < 2n} the test function u = u_0 + v uses
u_0 = -log(|x|^2 + n) / 2 and the correction v with Lv = R, v = 0 on the
boundary. The functional G(u) then splits pointwise into a u_0 part equal to
1/(|x|^2 + n) and a v part (1/n)(x.grad v)^2 + |grad v|^2.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.bodies.kinds import Slab
from src.localpde.functional import derivatives, kl_lower_bound
from src.localpde.grid import MaskedGrid
from src.localpde.solver import solve_dirichlet
from src.models.reports import SlabCase, SlabReport

logger = logging.getLogger(__name__)

MIN_NODES_ACROSS = 16
TRANSVERSE_H = {2: 0.02, 3: 0.05}


def slab_forcing(n: int):
    """R(x) = 2n/(|x|^2 + n) - 2|x|^2/(|x|^2 + n)^2, so that L(u_0 + v) = 1."""

    def forcing(points: np.ndarray) -> np.ndarray:
        s = np.einsum("ij,ij->i", points, points)
        return 2.0 * n / (s + n) - 2.0 * s / (s + n) ** 2

    return forcing


def poincare_bound(eps: float) -> float:
    """Bound 36 exp(eps^2/2) eps^2 on the Gaussian Dirichlet energy of v."""
    return 36.0 * math.exp(0.5 * eps * eps) * eps * eps


def slab_case(
    n: int,
    eps: float,
    nodes_across: int = 17,
    transverse_h: Optional[float] = None,
    rtol: float = 1e-10,
    maxiter: int = 20000,
) -> SlabCase:
    if not 0.0 < eps <= 0.5:
        raise ValueError(f"slab half-width must lie in (0, 0.5], got {eps}")
    if n not in TRANSVERSE_H:
        raise ValueError(f"slab experiments run in dimensions 2 and 3, got {n}")
    body = Slab.truncated(n, eps)
    h_axis = 2.0 * eps / nodes_across
    spacing = [transverse_h or TRANSVERSE_H[n]] * n
    spacing[0] = h_axis
    grid = MaskedGrid(body, spacing)
    resolved = len(np.unique(grid.multi_index[:, 0]))
    if resolved < MIN_NODES_ACROSS:
        raise ValueError(
            f"grid resolves only {resolved} nodes across a slab of half-width {eps}; "
            f"need at least {MIN_NODES_ACROSS}"
        )

    solution = solve_dirichlet(
        body, slab_forcing(n), "zero", grid=grid, rtol=rtol, maxiter=maxiter
    )
    x = grid.points
    s = np.einsum("ij,ij->i", x, x)
    grad_v = derivatives(grid, solution.u, solution.boundary).gradient
    grad_u = grad_v - x / (s + n)[:, None]
    weights = grid.gauss_weight / grid.gauss_weight.sum()

    radial_v = np.einsum("ij,ij->i", x, grad_v)
    energy_v = np.einsum("ij,ij->i", grad_v, grad_v)
    drift_u = np.einsum("ij,ij->i", x, grad_u)
    g_value = float(weights @ ((1.0 + drift_u) ** 2 / n + np.einsum("ij,ij->i", grad_u, grad_u)))
    dirichlet = float(weights @ energy_v)
    bound = poincare_bound(eps)
    lower = kl_lower_bound(body, grid=grid)

    case = SlabCase(
        eps=eps,
        h=h_axis,
        g_value=g_value,
        h_term=float(weights @ (1.0 / (s + n))),
        v_term=float(weights @ (radial_v**2 / n + energy_v)),
        dirichlet_energy=dirichlet,
        poincare_bound=bound,
        kl_lower_bound=lower,
        poincare_holds=dirichlet <= bound,
        lower_bound_holds=g_value >= lower - 1e-12,
    )
    logger.debug(
        f"Slab n={n} eps={eps}: G={g_value:.6f}, v energy={dirichlet:.3e} (bound {bound:.3e})"
    )
    return case


def fit_quadratic(eps: Sequence[float], values: Sequence[float], n: int):
    """Least-squares G(eps) = a + C eps^2; one point pins a = 1/(2n)."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(eps) == 1:
        intercept = 0.5 / n
        return intercept, float((values[0] - intercept) / eps[0] ** 2)
    design = np.column_stack([np.ones_like(eps), eps**2])
    (intercept, slope), *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(intercept), float(slope)


def slab_experiment(
    n: int,
    eps_values: Sequence[float],
    nodes_across: int = 17,
    transverse_h: Optional[float] = None,
    rtol: float = 1e-10,
    maxiter: int = 20000,
) -> SlabReport:
    """Solve the slab problem for every eps and fit the eps^2 law."""
    if not eps_values:
        raise ValueError("slab experiment needs at least one eps value")
    cases = [
        slab_case(n, eps, nodes_across, transverse_h, rtol, maxiter)
        for eps in sorted(eps_values)
    ]
    intercept, slope = fit_quadratic(
        [c.eps for c in cases], [c.g_value for c in cases], n
    )
    return SlabReport(
        n=n,
        nodes_across=nodes_across,
        cases=cases,
        fitted_c=slope,
        intercept=intercept,
        slack=intercept - 0.5 / n,
    )
