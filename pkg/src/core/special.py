"""Special functions behind every Gaussian measure in the laboratory.

The regularized lower incomplete gamma function follows the classical
series / continued-fraction split (series below ``a + 1``). Everything radial
is expressed through it:

    Psi_n(r) = gamma_n(r B) = P(n/2, r^2/2)
    Psi_n'(r) = c_n r^(n-1) exp(-r^2/2),   1/c_n = 2^(n/2-1) Gamma(n/2)
"""

import logging
import math
import sys
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, special

from src.core.errors import ConvergenceError, DimensionMismatchError, require

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

GAMMA_ACCURACY = 1.0e-15
GAMMA_MAX_ITERATION = 500
_TINY = sys.float_info.min / sys.float_info.epsilon


def phi(x: ArrayLike) -> ArrayLike:
    """Standard normal distribution function."""
    return special.ndtr(x)


def phi_inv(p: ArrayLike) -> ArrayLike:
    """Inverse of ``phi``; returns -inf at 0 and +inf at 1."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise ValueError("phi_inv requires probabilities in [0, 1]")
    return special.ndtri(p)


def normal_density(x: ArrayLike) -> ArrayLike:
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2.0 * math.pi)


def _series(a: float, x: float) -> float:
    gln = math.lgamma(a)
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(GAMMA_MAX_ITERATION):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * GAMMA_ACCURACY:
            return total * math.exp(-x + a * math.log(x) - gln)
    raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _continued_fraction(a: float, x: float) -> float:
    """Upper regularized gamma Q(a, x) by the modified Lentz method."""
    gln = math.lgamma(a)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, GAMMA_MAX_ITERATION + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < GAMMA_ACCURACY:
            return math.exp(-x + a * math.log(x) - gln) * h
    raise ConvergenceError(
        f"incomplete gamma continued fraction did not converge (a={a}, x={x})"
    )


def lower_gamma_scalar(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) for a single argument pair."""
    require(a > 0.0, "non-positive a is not allowed", ValueError)
    require(x >= 0.0, "negative x is not allowed", ValueError)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _series(a, x)
    return 1.0 - _continued_fraction(a, x)


_lower_gamma_vec = np.vectorize(lower_gamma_scalar, otypes=[float])


def regularized_lower_gamma(a: float, x: ArrayLike) -> ArrayLike:
    """Vectorized P(a, x); scalars in, scalar out."""
    if np.ndim(x) == 0:
        return lower_gamma_scalar(a, float(x))
    return _lower_gamma_vec(a, np.asarray(x, dtype=float))


def gamma_ratio(n: int, r: ArrayLike) -> ArrayLike:
    """P(n/2 + 1, r^2/2) / P(n/2, r^2/2).

    Equals the normalized second moment of the ball rB divided by n, computed
    without the cancellation in ``n Psi_n(r) - c_n r^n exp(-r^2/2)``. The ratio
    tends to 0 as r -> 0 and to 1 as r -> infinity.
    """
    a = 0.5 * n
    x = 0.5 * np.square(np.asarray(r, dtype=float))

    def _ratio(xi: float) -> float:
        if xi == 0.0:
            return 0.0
        if math.isinf(xi):
            return 1.0
        if xi < a + 1.0:
            # P(a+1, x) / P(a, x) = x/(a+1) * S(a+1, x) / S(a, x) for the series sums S
            return (xi / (a + 1.0)) * _series_sum(a + 1.0, xi) / _series_sum(a, xi)
        return lower_gamma_scalar(a + 1.0, xi) / lower_gamma_scalar(a, xi)

    if np.ndim(x) == 0:
        return _ratio(float(x))
    return np.vectorize(_ratio, otypes=[float])(x)


def _series_sum(a: float, x: float) -> float:
    """Sum_k x^k / ((a+1)...(a+k)), the series part of gamma(a, x)."""
    ap = a
    term = 1.0
    total = 1.0
    for _ in range(GAMMA_MAX_ITERATION):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * GAMMA_ACCURACY:
            return total
    raise ConvergenceError(f"series sum did not converge (a={a}, x={x})")


@dataclass(frozen=True)
class GaussConstants:
    """Radial constants of the standard Gaussian measure in dimension ``n``."""

    n: int
    c_n: float

    @classmethod
    def for_dim(cls, n: int) -> "GaussConstants":
        if n < 1:
            raise DimensionMismatchError(f"dimension must be positive, got {n}")
        log_inv = (0.5 * n - 1.0) * math.log(2.0) + math.lgamma(0.5 * n)
        return cls(n=n, c_n=math.exp(-log_inv))

    def psi_prime(self, r: ArrayLike) -> ArrayLike:
        r_arr = np.asarray(r, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            value = self.c_n * np.power(r_arr, self.n - 1) * np.exp(-0.5 * r_arr**2)
        value = np.where(np.isinf(r_arr), 0.0, value)
        return float(value) if np.ndim(r) == 0 else value


def gauss_constant(n: int) -> float:
    """c_n with 1/c_n = 2^(n/2-1) Gamma(n/2)."""
    return GaussConstants.for_dim(n).c_n


def psi_n(r: ArrayLike, n: int) -> ArrayLike:
    """Gaussian measure of the centered Euclidean ball of radius ``r``."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0.0):
        raise ValueError("psi_n requires r >= 0")
    x = 0.5 * np.square(r_arr)
    return regularized_lower_gamma(0.5 * n, float(x) if np.ndim(r) == 0 else x)


def psi_n_prime(r: ArrayLike, n: int) -> ArrayLike:
    return GaussConstants.for_dim(n).psi_prime(r)


def psi_n_quadrature(r: float, n: int) -> float:
    """Direct 1-D quadrature of c_n * int_0^r s^(n-1) exp(-s^2/2) ds."""
    if r == 0.0:
        return 0.0
    constants = GaussConstants.for_dim(n)
    upper = r if math.isfinite(r) else np.inf
    value, _ = integrate.quad(
        constants.psi_prime, 0.0, upper, epsabs=1e-14, epsrel=1e-13, limit=200
    )
    return float(value)


def validate_psi_identity(n: int, radii: np.ndarray) -> float:
    """Largest deviation between the incomplete-gamma form and quadrature."""
    deviations = [abs(psi_n(float(r), n) - psi_n_quadrature(float(r), n)) for r in radii]
    worst = max(deviations) if deviations else 0.0
    logger.debug(f"psi identity check n={n}: max deviation {worst:.3e}")
    return worst


def psi_n_inv(p: float, n: int, tol: float = 1e-13) -> float:
    """Inverse of ``psi_n`` by bracketing bisection followed by Newton polish.

    p = 1 maps to r = inf, the radius of the whole space.
    """
    require(0.0 <= p <= 1.0, f"psi_n_inv requires p in [0, 1], got {p}", ValueError)
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return math.inf
    constants = GaussConstants.for_dim(n)

    lo, hi = 0.0, 1.0
    while psi_n(hi, n) < p:
        lo, hi = hi, 2.0 * hi
        if hi > 1e3:
            raise ConvergenceError(f"psi_n_inv failed to bracket p={p}")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if psi_n(mid, n) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6 * max(hi, 1e-3):
            break

    r = 0.5 * (lo + hi)
    for _ in range(50):
        slope = constants.psi_prime(r)
        if slope <= 0.0:
            break
        step = (psi_n(r, n) - p) / slope
        candidate = r - step
        if not lo <= candidate <= hi:
            candidate = 0.5 * (lo + hi)
        if psi_n(candidate, n) < p:
            lo = candidate
        else:
            hi = candidate
        r = candidate
        if abs(step) <= tol * max(r, 1.0):
            break
    return float(r)


def psi_n_inv_slope(r: float, n: int) -> float:
    """d psi_n^-1 / dp at p = psi_n(r); zero at r = inf."""
    if math.isinf(r):
        return 0.0
    return 1.0 / float(psi_n_prime(r, n))


def ball_second_moment(rho: float, n: int) -> float:
    """int_{rho B} |x|^2 d gamma_n = n Psi_n(rho) - c_n rho^n exp(-rho^2/2)."""
    if math.isinf(rho):
        return float(n)
    if rho == 0.0:
        return 0.0
    # equal to n P(n/2 + 1, rho^2/2); no cancellation between the two terms
    return float(n * regularized_lower_gamma(0.5 * n + 1.0, 0.5 * rho * rho))


def interval_measure(a: ArrayLike) -> ArrayLike:
    """gamma_1([-a, a]) = 2 phi(a) - 1, accurate for small ``a``."""
    return special.erf(np.asarray(a, dtype=float) / math.sqrt(2.0))


def interval_second_moment(a: ArrayLike) -> ArrayLike:
    """int_{-a}^{a} x^2 d gamma_1 = (2 phi(a) - 1) - 2 a phi'(a)."""
    a_arr = np.asarray(a, dtype=float)
    with np.errstate(invalid="ignore"):
        value = interval_measure(a_arr) - 2.0 * a_arr * normal_density(a_arr)
    return np.where(np.isinf(a_arr), 1.0, value)
