"""The refinement function sigma_n.

sigma_n is the increasing solution of

    1 + sigma''(Psi) Psi / sigma'(Psi) = 2/n - c_n r^n exp(-r^2/2) / (n^2 Psi),   Psi = Psi_n(r).

Along the radius, g(r) = log sigma'(Psi_n(r)) satisfies g' = A(r) Psi'/Psi with

    A(r) = 1/n - 1 + P(n/2 + 1, r^2/2) / (n P(n/2, r^2/2)),

which is the same right-hand side written without cancellation. The state
(g, sigma) is integrated outward from the anchor r = 1 where sigma = 0 and
sigma' = 1.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator, make_interp_spline

from src.core.errors import ConvergenceError, require
from src.core.reporting import write_csv
from src.core.special import GaussConstants, gamma_ratio, psi_n
from src.models.reports import (
    ConvexityCertificate,
    RefinementReport,
    SigmaNormalization,
    SigmaReport,
)

logger = logging.getLogger(__name__)

R_MIN = 1e-3
GEOMETRIC_UPPER = 0.5
ANCHOR_R = 1.0
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
DEFECT_TOLERANCE = 1e-9
INTERIOR_MARGIN_RANGE = (0.1, 3.0)
SIGMA_CSV_HEADERS = ("r", "psi", "sigma", "sigma_prime")


def ode_factor(n: int, r: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """A(r) such that d/dr log sigma'(Psi_n(r)) = A(r) Psi_n'(r) / Psi_n(r)."""
    return 1.0 / n - 1.0 + gamma_ratio(n, r) / n


def convexity_margin(n: int, r: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """sigma'' Psi / sigma' + (n-1)/n, which is P(n/2+1, x) / (n P(n/2, x))."""
    return gamma_ratio(n, r) / n


def log_slope(n: int, r: float) -> float:
    """g'(r) = A(r) Psi'(r) / Psi(r)."""
    constants = GaussConstants.for_dim(n)
    return float(ode_factor(n, r)) * constants.psi_prime(r) / float(psi_n(r, n))


def sigma_grid(nodes: int, r_max: float) -> np.ndarray:
    """Geometric nodes on [R_MIN, 0.5), uniform beyond, with r = 1 an exact node."""
    geometric = max(nodes // 4, 2)
    uniform = nodes - geometric
    below = int(round(uniform * (ANCHOR_R - GEOMETRIC_UPPER) / (r_max - GEOMETRIC_UPPER)))
    below = max(below, 1)
    above = uniform - below
    return np.concatenate(
        [
            np.geomspace(R_MIN, GEOMETRIC_UPPER, geometric, endpoint=False),
            np.linspace(GEOMETRIC_UPPER, ANCHOR_R, below, endpoint=False),
            np.linspace(ANCHOR_R, r_max, above),
        ]
    )


def chord_defects(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """f_i - [w f_{i-1} + (1-w) f_{i+1}] with w the interpolation weight at x_i.

    Non-positive everywhere for convex f, non-negative for concave f.
    """
    left, mid, right = x[:-2], x[1:-1], x[2:]
    w = (right - mid) / (right - left)
    return f[1:-1] - (w * f[:-2] + (1.0 - w) * f[2:])


@dataclass(frozen=True, eq=False)
class SigmaTable:
    """sigma_n tabulated along the radius r."""

    n: int
    r_grid: np.ndarray
    psi: np.ndarray
    sigma: np.ndarray
    log_sigma_prime: np.ndarray
    normalization: SigmaNormalization = field(default_factory=SigmaNormalization)

    @property
    def sigma_prime(self) -> np.ndarray:
        return np.exp(self.log_sigma_prime)

    @property
    def nodes(self) -> int:
        return len(self.r_grid)

    @property
    def anchor_index(self) -> int:
        return int(np.argmin(np.abs(self.r_grid - self.normalization.anchor_r)))

    @cached_property
    def _forward(self) -> PchipInterpolator:
        return PchipInterpolator(self.psi, self.sigma, extrapolate=False)

    @cached_property
    def _slope(self) -> PchipInterpolator:
        return PchipInterpolator(self.psi, self.log_sigma_prime, extrapolate=False)

    @cached_property
    def _inverse(self) -> PchipInterpolator:
        return PchipInterpolator(self.sigma, self.psi, extrapolate=False)

    def _clamp(self, values: np.ndarray, lo: float, hi: float, what: str) -> np.ndarray:
        if np.any((values < lo) | (values > hi)):
            logger.warning(
                f"{what} outside the sigma_{self.n} table [{lo:.6g}, {hi:.6g}]; clamping"
            )
        return np.clip(values, lo, hi)

    def rescaled(self, scale: float, offset: float) -> "SigmaTable":
        """The table of scale * sigma + offset."""
        require(scale > 0.0, f"rescaling needs a positive scale, got {scale}", ValueError)
        normalization = SigmaNormalization(
            anchor_r=self.normalization.anchor_r,
            sigma_at_anchor=scale * self.normalization.sigma_at_anchor + offset,
            slope_at_anchor=scale * self.normalization.slope_at_anchor,
        )
        return SigmaTable(
            n=self.n,
            r_grid=self.r_grid,
            psi=self.psi,
            sigma=scale * self.sigma + offset,
            log_sigma_prime=self.log_sigma_prime + math.log(scale),
            normalization=normalization,
        )

    def csv_rows(self) -> List[List[float]]:
        return [
            [float(v) for v in row]
            for row in zip(self.r_grid, self.psi, self.sigma, self.sigma_prime)
        ]

    def to_csv(self, path: Union[str, Path]) -> None:
        write_csv(path, SIGMA_CSV_HEADERS, self.csv_rows())


def build_sigma(n: int, r_max: float = 6.0, nodes: int = 4096) -> SigmaTable:
    """Integrate the sigma_n ODE on the default grid."""
    require(n >= 1, f"dimension must be positive, got {n}", ValueError)
    require(3.0 <= r_max <= 8.0, f"r_max must lie in [3, 8], got {r_max}", ValueError)
    require(nodes >= 1000, f"at least 1000 nodes are needed, got {nodes}", ValueError)

    grid = sigma_grid(nodes, r_max)
    anchor = int(np.flatnonzero(grid == ANCHOR_R)[0])
    constants = GaussConstants.for_dim(n)

    def rhs(r: float, state: np.ndarray) -> np.ndarray:
        return np.array([log_slope(n, r), math.exp(state[0]) * constants.psi_prime(r)])

    def solve(t_eval: np.ndarray) -> np.ndarray:
        solution = integrate.solve_ivp(
            rhs,
            (ANCHOR_R, float(t_eval[-1])),
            np.zeros(2),
            method="DOP853",
            t_eval=t_eval,
            rtol=ODE_RTOL,
            atol=ODE_ATOL,
        )
        if not solution.success:
            raise ConvergenceError(
                f"sigma_{n} integration towards r={t_eval[-1]} failed: {solution.message}"
            )
        return solution.y

    upper = solve(grid[anchor:])
    lower = solve(grid[: anchor + 1][::-1])[:, ::-1]
    state = np.hstack([lower[:, :-1], upper])

    table = SigmaTable(
        n=n,
        r_grid=grid,
        psi=np.asarray(psi_n(grid, n), dtype=float),
        sigma=state[1],
        log_sigma_prime=state[0],
    )
    steps = np.diff(table.sigma)
    if not np.all(steps > 0.0) or not np.all(np.diff(table.psi) > 0.0):
        worst = int(np.argmin(steps))
        raise ConvergenceError(
            f"sigma_{n} table is not strictly increasing near r={grid[worst]:.6g} "
            f"(step {steps[worst]:.3e})"
        )
    logger.debug(
        f"Built sigma_{n} on {nodes} nodes: sigma in [{table.sigma[0]:.6g}, {table.sigma[-1]:.6g}]"
    )
    return table


def sigma_eval(table: SigmaTable, y: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    values = table._clamp(np.asarray(y, dtype=float), table.psi[0], table.psi[-1], "y")
    result = table._forward(values)
    return float(result) if np.ndim(y) == 0 else result


def sigma_prime_eval(table: SigmaTable, y: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    values = table._clamp(np.asarray(y, dtype=float), table.psi[0], table.psi[-1], "y")
    result = np.exp(table._slope(values))
    return float(result) if np.ndim(y) == 0 else result


def sigma_inverse(table: SigmaTable, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    values = table._clamp(np.asarray(x, dtype=float), table.sigma[0], table.sigma[-1], "sigma")
    result = table._inverse(values)
    return float(result) if np.ndim(x) == 0 else result


def tau_eval(table: SigmaTable, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """tau_n(x) = sigma_n^{-1}(x)^{1/n}."""
    y = np.maximum(np.asarray(sigma_inverse(table, x), dtype=float), 0.0)
    result = np.power(y, 1.0 / table.n)
    return float(result) if np.ndim(x) == 0 else result


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def quadrature_psi(n: int, r_grid: np.ndarray) -> np.ndarray:
    """Psi_n at the nodes by cumulative adaptive quadrature of c_n s^(n-1) e^(-s^2/2)."""
    constants = GaussConstants.for_dim(n)
    values = np.empty(len(r_grid))
    total = 0.0
    previous = 0.0
    for i, r in enumerate(r_grid):
        piece, _ = integrate.quad(
            constants.psi_prime, previous, float(r), epsabs=0.0, epsrel=1e-13, limit=200
        )
        total += piece
        values[i] = total
        previous = float(r)
    return values


def ode_residual(table: SigmaTable) -> np.ndarray:
    """Per-node residual of the defining ODE, read off the tabulated state.

    With t = log r and s = r Psi'/Psi (Psi by quadrature), the ODE reads
    dg/dt = s (2/n - 1 - s/n^2). dg/dt comes from a degree-7 spline of the
    table's log sigma' in t, so this is the defining residual scaled by
    d log Psi / d log r.
    """
    n = table.n
    r = table.r_grid
    constants = GaussConstants.for_dim(n)
    s = r * constants.psi_prime(r) / quadrature_psi(n, r)
    g_t = make_interp_spline(np.log(r), table.log_sigma_prime, k=7).derivative()(np.log(r))
    return np.abs(g_t - s * (2.0 / n - 1.0 - s / (n * n)))


def integral_residual(table: SigmaTable, blocks: int = 64) -> float:
    """Largest |Delta log sigma' - int A Psi'/Psi dr| over consecutive node blocks."""
    n = table.n
    edges = np.unique(np.linspace(0, table.nodes - 1, blocks + 1).astype(int))
    worst = 0.0
    for i, j in zip(edges[:-1], edges[1:]):
        expected, _ = integrate.quad(
            lambda s: log_slope(n, s),
            float(table.r_grid[i]),
            float(table.r_grid[j]),
            epsabs=1e-13,
            epsrel=1e-12,
            limit=400,
        )
        worst = max(worst, abs(table.log_sigma_prime[j] - table.log_sigma_prime[i] - expected))
    return worst


def small_y_limit_error(table: SigmaTable, count: int = 8) -> float:
    """Distance of d log sigma' / d log y from -(n-1)/n on the smallest nodes."""
    log_y = np.log(table.psi[: count + 1])
    slopes = np.diff(table.log_sigma_prime[: count + 1]) / np.diff(log_y)
    return float(np.max(np.abs(slopes + (table.n - 1) / table.n)))


def one_dimensional_identity_deviation(table: SigmaTable, samples: int = 64) -> float:
    """n = 1: log sigma'(Psi(r)) = [s Psi'/Psi]_1^r + int_1^r s^2 Psi'/Psi ds."""
    require(table.n == 1, "the closed identity only holds for n = 1", ValueError)
    constants = GaussConstants.for_dim(1)

    def hazard(s: float) -> float:
        return constants.psi_prime(s) / float(psi_n(s, 1))

    indices = np.unique(np.linspace(0, table.nodes - 1, samples).astype(int))
    worst = 0.0
    for k in indices:
        r = float(table.r_grid[k])
        tail, _ = integrate.quad(
            lambda s: s * s * hazard(s), ANCHOR_R, r, epsabs=1e-13, epsrel=1e-12, limit=200
        )
        expected = r * hazard(r) - ANCHOR_R * hazard(ANCHOR_R) + tail
        worst = max(worst, abs(table.log_sigma_prime[k] - expected))
    return worst


def log_fit_deviation(table: SigmaTable) -> float:
    """Distance of the table from its best affine image of log y (diagnostic)."""
    design = np.column_stack([np.log(table.psi), np.ones(table.nodes)])
    coefficients, *_ = np.linalg.lstsq(design, table.sigma, rcond=None)
    return float(np.max(np.abs(design @ coefficients - table.sigma)))


def certify_pow_convexity(table: SigmaTable, keep_margins: bool = True) -> ConvexityCertificate:
    """Analytic and discrete convexity of y -> sigma(y^n), concavity of tau."""
    n = table.n
    margins = np.asarray(convexity_margin(n, table.r_grid), dtype=float)
    lo, hi = INTERIOR_MARGIN_RANGE
    interior = (table.r_grid >= lo) & (table.r_grid <= hi)
    roots = np.power(table.psi, 1.0 / n)
    convexity = -chord_defects(roots, table.sigma)
    concavity = chord_defects(table.sigma, roots)
    certificate = ConvexityCertificate(
        n=n,
        nodes=table.nodes,
        min_margin=float(margins.min()),
        min_interior_margin=float(margins[interior].min()),
        min_convexity_defect=float(convexity.min()),
        min_concavity_defect=float(concavity.min()),
        passed=bool(
            margins.min() >= 0.0
            and margins[interior].min() > 1e-6
            and convexity.min() >= -DEFECT_TOLERANCE
            and concavity.min() >= -DEFECT_TOLERANCE
        ),
        margins=[float(m) for m in margins] if keep_margins else [],
    )
    if not certificate.passed:
        logger.warning(f"sigma_{n} convexity certificate failed: {certificate.min_convexity_defect:.3e}")
    return certificate


def refinement_study(n: int, nodes: int = 4096, r_max: float = 6.0) -> RefinementReport:
    """Uniform change of sigma_eval between ``nodes`` and ``2 * nodes`` on the interior 90%."""
    coarse = build_sigma(n, r_max, nodes)
    fine = build_sigma(n, r_max, 2 * nodes)
    r_lo, r_hi = 0.05 * r_max, 0.95 * r_max
    radii = np.linspace(r_lo, r_hi, 997)
    y = np.asarray(psi_n(radii, n), dtype=float)
    change = np.max(np.abs(sigma_eval(coarse, y) - sigma_eval(fine, y)))
    return RefinementReport(n=n, nodes=nodes, r_lo=r_lo, r_hi=r_hi, max_change=float(change))


def sigma_report(table: SigmaTable, keep_margins: bool = False) -> SigmaReport:
    identity: Optional[float] = None
    log_fit: Optional[float] = None
    if table.n == 1:
        identity = one_dimensional_identity_deviation(table)
        log_fit = log_fit_deviation(table)
    return SigmaReport(
        n=table.n,
        nodes=table.nodes,
        r_min=float(table.r_grid[0]),
        r_max=float(table.r_grid[-1]),
        normalization=table.normalization,
        ode_residual_max=float(ode_residual(table).max()),
        integral_residual_max=integral_residual(table),
        small_y_limit_error=small_y_limit_error(table),
        identity_deviation=identity,
        log_fit_deviation=log_fit,
        certificate=certify_pow_convexity(table, keep_margins=keep_margins),
    )
