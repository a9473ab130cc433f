"""Radial solutions of Lu = 1 on centered balls.

With u(0) = u'(0) = 0 the ODE u'' + ((n-1)/r - r) u' = 1 integrates to

    u'(r) = exp(r^2/2) r^(1-n) int_0^r s^(n-1) exp(-s^2/2) ds = Psi_n(r) / Psi_n'(r).
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from src.core.special import GaussConstants, psi_n

logger = logging.getLogger(__name__)

RESIDUAL_STEP = 1e-5
POTENTIAL_KNOTS = 1025


@dataclass(frozen=True)
class RadialProfile:
    n: int
    rho: float
    r: np.ndarray
    du: np.ndarray
    u: np.ndarray


def radial_slope(n: int, r):
    """u_0'(r), with the r -> 0 limit 0."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    slope = np.zeros_like(r_arr)
    positive = r_arr > 0.0
    if positive.any():
        rp = r_arr[positive]
        slope[positive] = psi_n(rp, n) / GaussConstants.for_dim(n).psi_prime(rp)
    return float(slope[0]) if np.ndim(r) == 0 else slope


def radial_potential(n: int, radii) -> np.ndarray:
    """u_0(r) = int_0^r u_0'(s) ds at arbitrary radii.

    Exact piecewise quadrature on a fine table followed by cubic interpolation.
    """
    radii = np.asarray(radii, dtype=float)
    top = float(np.max(radii, initial=0.0))
    if top == 0.0:
        return np.zeros_like(radii)
    knots = np.linspace(0.0, top, POTENTIAL_KNOTS)
    pieces = [
        integrate.quad(lambda s: radial_slope(n, s), a, b, epsabs=1e-15, epsrel=1e-12)[0]
        for a, b in zip(knots[:-1], knots[1:])
    ]
    table = np.concatenate([[0.0], np.cumsum(pieces)])
    spline = CubicSpline(knots, table, bc_type=((1, 0.0), (1, radial_slope(n, top))))
    return spline(radii)


def radial_solution(n: int, rho: float, r_grid: np.ndarray) -> RadialProfile:
    """u_0 and u_0' on ``r_grid`` (radii in [0, rho])."""
    r = np.asarray(r_grid, dtype=float)
    if np.any(r < 0.0) or np.any(r > rho * (1.0 + 1e-12)):
        raise ValueError(f"radial grid must lie in [0, {rho}]")
    return RadialProfile(n=n, rho=rho, r=r, du=radial_slope(n, r), u=radial_potential(n, r))


def radial_residual(n: int, r_grid: np.ndarray) -> float:
    """Largest |u'' + ((n-1)/r - r) u' - 1| with u'' from centered differences of u'."""
    r = np.asarray(r_grid, dtype=float)
    r = r[r > 2.0 * RESIDUAL_STEP]
    step = RESIDUAL_STEP * np.maximum(r, 1.0)
    second = (radial_slope(n, r + step) - radial_slope(n, r - step)) / (2.0 * step)
    residual = second + ((n - 1) / r - r) * radial_slope(n, r) - 1.0
    worst = float(np.max(np.abs(residual), initial=0.0))
    logger.debug(f"Radial ODE residual n={n}: {worst:.2e}")
    return worst


def radial_functional(n: int, rho: float) -> float:
    """Normalized Hessian functional of the radial solution on rho B."""
    if rho <= 0.0:
        raise ValueError(f"radius must be positive, got {rho}")
    return float(1.0 - ((n - 1) / rho - rho) * radial_slope(n, rho))


def radial_functional_quadrature(n: int, rho: float) -> float:
    """The same value by direct quadrature of |Hess u|^2 + |grad u|^2 in polar form."""

    def density(r: float) -> float:
        if r == 0.0:
            return 0.0
        du = radial_slope(n, r)
        d2u = 1.0 - ((n - 1) / r - r) * du
        return (d2u**2 + (n - 1) * (du / r) ** 2 + du**2) * r ** (n - 1) * np.exp(-0.5 * r * r)

    numerator = integrate.quad(density, 0.0, rho, epsabs=1e-14, epsrel=1e-11, limit=200)[0]
    denominator = psi_n(rho, n) / GaussConstants.for_dim(n).c_n
    return float(numerator / denominator)
