"""Gaussian measures and second moments of bodies.

Every estimate goes through the same dispatch: closed forms first, then
one-dimensional polar quadrature in the plane (and a product rule on the
sphere for ellipsoids in R^3), and seeded Monte Carlo for everything else.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from src.bodies.combinations import Dilate, GeometricMean, MinkowskiCombo
from src.bodies.interfaces import Body
from src.bodies.kinds import Ball, Box, Ellipsoid, Halfspace, Slab, SymPolytope
from src.core.errors import DimensionMismatchError, SamplingError
from src.core.sampling import sample_moments
from src.core.special import (
    ball_second_moment,
    interval_measure,
    interval_second_moment,
    normal_density,
    phi,
    psi_n,
)
from src.models.estimates import EstimationMethod, MeasureEstimate, Quantity, SamplingBudget

logger = logging.getLogger(__name__)

MIN_HITS = 100
SPHERE_ORDER = 80

Integrand = Callable[[np.ndarray], np.ndarray]
Term = Tuple[Body, Quantity]


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------


def _scaled(body: Body, t: float) -> Optional[Body]:
    if isinstance(body, Ball):
        return Ball(body.n, body.radius * t)
    if isinstance(body, Box):
        return Box(tuple(w * t for w in body.half_widths))
    if isinstance(body, Ellipsoid):
        return Ellipsoid(tuple(a * t for a in body.semi_axes))
    if isinstance(body, SymPolytope):
        return SymPolytope(tuple(tuple(c * t for c in v) for v in body.vertices))
    if isinstance(body, Slab):
        cap = None if body.cap is None else body.cap * t
        return Slab(body.n, body.half_width * t, body.axis, cap)
    if isinstance(body, Halfspace):
        return Halfspace(body.normal, body.offset * t)
    if isinstance(body, Dilate):
        return Dilate(body.factor * t, body.child)
    return None


def canonical(body: Body) -> Body:
    """Collapse dilates of primitives and reducible Minkowski combinations."""
    if isinstance(body, MinkowskiCombo):
        reduced = body.reduced()
        return canonical(reduced) if reduced is not None else body
    if isinstance(body, Dilate):
        inner = canonical(body.child)
        scaled = _scaled(inner, body.factor)
        return scaled if scaled is not None else Dilate(body.factor, inner)
    return body


def _walk(body: Body):
    yield body
    for child in body.children():
        yield from _walk(child)


def estimate_metadata(body: Body) -> Dict[str, Any]:
    """Approximation flags carried by every estimate of ``body``."""
    metadata: Dict[str, Any] = {"approximate": bool(canonical(body).approximate)}
    resolutions = [
        node.resolution
        for node in _walk(body)
        if isinstance(node, (MinkowskiCombo, GeometricMean)) and node.approximate
    ]
    if resolutions and metadata["approximate"]:
        metadata["net_resolution"] = max(resolutions)
    if any(isinstance(node, GeometricMean) for node in _walk(body)):
        metadata["bias"] = "upper"
    return metadata


# ---------------------------------------------------------------------------
# Closed forms and quadrature
# ---------------------------------------------------------------------------


def _exact_probability(body: Body) -> Optional[float]:
    if isinstance(body, Ball):
        return 1.0 if math.isinf(body.radius) else float(psi_n(body.radius, body.n))
    if isinstance(body, Box):
        return float(np.prod(interval_measure(body.widths)))
    if isinstance(body, Slab):
        along = float(interval_measure(body.half_width))
        if body.cap is None or body.n == 1:
            return along
        return along * float(psi_n(body.cap, body.n - 1))
    if isinstance(body, Halfspace):
        return float(phi(body.offset))
    if body.dim == 1 and body.is_origin_symmetric and body.is_convex:
        return float(interval_measure(body.support_function(np.ones((1, 1)))[0]))
    return None


def _exact_second_moment(body: Body) -> Optional[float]:
    if isinstance(body, Ball):
        return ball_second_moment(body.radius, body.n)
    if isinstance(body, Box):
        masses = interval_measure(body.widths)
        moments = interval_second_moment(body.widths)
        total = 0.0
        for i in range(body.dim):
            total += float(moments[i] * np.prod(np.delete(masses, i)))
        return total
    if isinstance(body, Slab):
        along_mass = float(interval_measure(body.half_width))
        along_moment = float(interval_second_moment(body.half_width))
        if body.cap is None or body.n == 1:
            across_mass, across_moment = 1.0, float(body.n - 1)
        else:
            across_mass = float(psi_n(body.cap, body.n - 1))
            across_moment = ball_second_moment(body.cap, body.n - 1)
        return along_moment * across_mass + along_mass * across_moment
    if isinstance(body, Halfspace):
        b = body.offset
        return body.dim * float(phi(b)) - b * float(normal_density(b))
    if body.dim == 1 and body.is_origin_symmetric and body.is_convex:
        return float(interval_second_moment(body.support_function(np.ones((1, 1)))[0]))
    return None


def _profile(quantity: Quantity, n: int) -> Callable[[np.ndarray], np.ndarray]:
    if quantity == Quantity.PROBABILITY:
        return lambda rho: np.asarray(psi_n(rho, n), dtype=float)
    return lambda rho: np.vectorize(lambda r: ball_second_moment(float(r), n))(rho)


def planar_breakpoints(body: Body) -> np.ndarray:
    """Angles in [0, pi) where the radial function of a planar body has kinks."""
    if isinstance(body, SymPolytope):
        angles = body.vertex_angles()
    elif isinstance(body, Slab) and body.cap is not None:
        corner = np.empty((2, 2))
        corner[:, body.axis] = [body.half_width, -body.half_width]
        corner[:, 1 - body.axis] = body.cap
        angles = np.arctan2(corner[:, 1], corner[:, 0])
    else:
        angles = np.empty(0)
    return np.unique(np.mod(angles, math.pi))


def polar_average(body: Body, profile: Callable[[np.ndarray], np.ndarray]) -> float:
    """(1/2pi) int profile(rho_K(theta)) d theta for an origin-symmetric planar body."""

    def integrand(theta: float) -> float:
        direction = np.array([[math.cos(theta), math.sin(theta)]])
        return float(profile(body.radial_function(direction))[0])

    knots = [0.0] + [a for a in planar_breakpoints(body) if 0.0 < a < math.pi] + [math.pi]
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        value, _ = integrate.quad(integrand, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += value
    return total / math.pi


def sphere_average(body: Body, profile: Callable[[np.ndarray], np.ndarray]) -> float:
    """Average of profile(rho_K) over S^2 for an origin-symmetric body.

    Gauss-Legendre in the height of the upper hemisphere, trapezoid in azimuth.
    """
    nodes, weights = np.polynomial.legendre.leggauss(SPHERE_ORDER)
    z = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    azimuth = 2.0 * math.pi * np.arange(2 * SPHERE_ORDER) / (2 * SPHERE_ORDER)
    height, angle = np.meshgrid(z, azimuth, indexing="ij")
    ring = np.sqrt(1.0 - height**2)
    directions = np.column_stack(
        [(ring * np.cos(angle)).ravel(), (ring * np.sin(angle)).ravel(), height.ravel()]
    )
    values = profile(body.radial_function(directions)).reshape(SPHERE_ORDER, -1)
    return float(w @ values.mean(axis=1))


def closed_form(body: Body, quantity: Quantity) -> Optional[Tuple[float, EstimationMethod]]:
    """Value and method when no sampling is needed, else None."""
    body = canonical(body)
    exact = (
        _exact_probability(body)
        if quantity == Quantity.PROBABILITY
        else _exact_second_moment(body)
    )
    if exact is not None:
        return exact, EstimationMethod.EXACT
    if body.dim == 2 and isinstance(body, (Ellipsoid, SymPolytope, Slab)):
        return polar_average(body, _profile(quantity, 2)), EstimationMethod.QUADRATURE
    if body.dim == 3 and isinstance(body, Ellipsoid):
        return sphere_average(body, _profile(quantity, 3)), EstimationMethod.SPHERE_QUADRATURE
    return None


def requires_sampling(body: Body) -> bool:
    return closed_form(body, Quantity.PROBABILITY) is None


# ---------------------------------------------------------------------------
# Joint estimates
# ---------------------------------------------------------------------------


@dataclass
class JointEstimate:
    """Several estimates from one shared point stream, with their covariance."""

    labels: List[str]
    values: np.ndarray
    covariance: np.ndarray
    methods: List[str]
    quantities: List[Optional[str]]
    dim: int
    samples: int = 0
    seed: Optional[int] = None
    body_kinds: List[Optional[str]] = field(default_factory=list)
    metadata: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.maximum(np.diag(self.covariance), 0.0))

    def estimate(self, index: int) -> MeasureEstimate:
        quantity = self.quantities[index]
        if quantity is None:
            raise ValueError(f"term '{self.labels[index]}' is not a measure or moment")
        sampled = self.methods[index] == EstimationMethod.MONTE_CARLO.value
        return MeasureEstimate(
            quantity=quantity,
            value=float(self.values[index]),
            std_error=float(self.std_errors[index]),
            method=self.methods[index],
            samples=self.samples if sampled else 0,
            seed=self.seed if sampled else None,
            body_kind=self.body_kinds[index] if self.body_kinds else None,
            dim=self.dim,
            metadata=self.metadata[index] if self.metadata else {},
        )

    def estimates(self) -> List[MeasureEstimate]:
        return [self.estimate(i) for i in range(len(self.values))]


def _require_budget(budget: Optional[SamplingBudget], what: str) -> SamplingBudget:
    if budget is None or budget.samples <= 0:
        raise SamplingError(f"{what} has no closed form and the sampling budget is zero")
    return budget


def _check_hits(hits: np.ndarray, labels: Sequence[str]) -> None:
    for count, label in zip(hits, labels):
        if count < MIN_HITS:
            logger.warning(f"Refusing Monte Carlo estimate for {label}: only {count:.0f} hits")
            raise SamplingError(
                f"Monte Carlo refuses {label}: p*N = {count:.0f} < {MIN_HITS}; "
                "use an exact formula or a larger budget"
            )


def estimate_terms(
    terms: Sequence[Term],
    budget: Optional[SamplingBudget] = None,
    force_sampling: bool = False,
) -> JointEstimate:
    """Joint estimates of measures or second moments with common random numbers."""
    if not terms:
        raise ValueError("no terms to estimate")
    dim = terms[0][0].dim
    if any(body.dim != dim for body, _ in terms):
        raise DimensionMismatchError("jointly estimated bodies must share the dimension")

    count = len(terms)
    values = np.zeros(count)
    covariance = np.zeros((count, count))
    methods: List[str] = [EstimationMethod.MONTE_CARLO.value] * count
    sampled: List[int] = []
    for i, (body, quantity) in enumerate(terms):
        closed = None if force_sampling else closed_form(body, Quantity(quantity))
        if closed is None:
            sampled.append(i)
        else:
            values[i], method = closed
            methods[i] = method.value

    labels = [f"{Quantity(q).value}:{body.describe()}" for body, q in terms]
    result = JointEstimate(
        labels=labels,
        values=values,
        covariance=covariance,
        methods=methods,
        quantities=[Quantity(q).value for _, q in terms],
        dim=dim,
        body_kinds=[body.kind for body, _ in terms],
        metadata=[estimate_metadata(body) for body, _ in terms],
    )
    if not sampled:
        return result

    budget = _require_budget(budget, labels[sampled[0]])
    bodies = [terms[i][0] for i in sampled]
    moment_columns = [Quantity(terms[i][1]) != Quantity.PROBABILITY for i in sampled]

    def integrands(points: np.ndarray) -> np.ndarray:
        squared = np.einsum("ij,ij->i", points, points)
        columns = []
        hits = []
        for body, is_moment in zip(bodies, moment_columns):
            inside = body.membership(points).astype(float)
            columns.append(inside * squared if is_moment else inside)
            hits.append(inside)
        return np.column_stack(columns + hits)

    moments = sample_moments(budget, dim, integrands)
    k = len(sampled)
    _check_hits(moments.sums[k:], [labels[i] for i in sampled])
    index = np.array(sampled)
    values[index] = moments.mean[:k]
    covariance[np.ix_(index, index)] = moments.mean_covariance[:k, :k]
    result.samples = budget.samples
    result.seed = budget.seed
    logger.debug(f"Sampled {k} terms with {budget.samples} points (seed={budget.seed})")
    return result


def monte_carlo_integrals(
    body: Body,
    budget: SamplingBudget,
    integrands: Dict[str, Integrand],
) -> JointEstimate:
    """Unnormalized integrals of f * 1_K d gamma_n for each named integrand.

    The first entry is always the measure of ``body`` itself.
    """
    budget = _require_budget(budget, body.describe())
    names = ["measure"] + list(integrands)
    functions = list(integrands.values())

    def evaluate(points: np.ndarray) -> np.ndarray:
        inside = body.membership(points).astype(float)
        return np.column_stack([inside] + [inside * f(points) for f in functions])

    moments = sample_moments(budget, body.dim, evaluate)
    _check_hits(moments.sums[:1], [body.describe()])
    return JointEstimate(
        labels=names,
        values=moments.mean,
        covariance=moments.mean_covariance,
        methods=[EstimationMethod.MONTE_CARLO.value] * len(names),
        quantities=[Quantity.PROBABILITY.value] + [None] * len(functions),
        dim=body.dim,
        samples=budget.samples,
        seed=budget.seed,
        body_kinds=[body.kind] * len(names),
        metadata=[estimate_metadata(body)] * len(names),
    )


# ---------------------------------------------------------------------------
# Public estimators
# ---------------------------------------------------------------------------


def measure(
    body: Body, budget: Optional[SamplingBudget] = None, force_sampling: bool = False
) -> MeasureEstimate:
    """gamma_n(K)."""
    return estimate_terms([(body, Quantity.PROBABILITY)], budget, force_sampling).estimate(0)


def measure_many(
    bodies: Sequence[Body],
    budget: Optional[SamplingBudget] = None,
    force_sampling: bool = False,
) -> JointEstimate:
    return estimate_terms([(b, Quantity.PROBABILITY) for b in bodies], budget, force_sampling)


def second_moment(
    body: Body, budget: Optional[SamplingBudget] = None, force_sampling: bool = False
) -> MeasureEstimate:
    """int_K |x|^2 d gamma_n, not normalized."""
    return estimate_terms([(body, Quantity.SECOND_MOMENT)], budget, force_sampling).estimate(0)


def normalized_second_moment(
    body: Body, budget: Optional[SamplingBudget] = None, force_sampling: bool = False
) -> MeasureEstimate:
    """E_{gamma_K} |x|^2 with the delta-method error of the ratio."""
    joint = estimate_terms(
        [(body, Quantity.PROBABILITY), (body, Quantity.SECOND_MOMENT)], budget, force_sampling
    )
    p, m = joint.values
    if p <= 0.0:
        raise SamplingError(f"{body.describe()} has zero measure")
    ratio = m / p
    gradient = np.array([-m / p**2, 1.0 / p])
    variance = float(gradient @ joint.covariance @ gradient)
    method = joint.methods[0] if joint.methods[0] == joint.methods[1] else EstimationMethod.MONTE_CARLO.value
    sampled = EstimationMethod.MONTE_CARLO.value in joint.methods
    return MeasureEstimate(
        quantity=Quantity.NORMALIZED_SECOND_MOMENT,
        value=float(ratio),
        std_error=math.sqrt(max(variance, 0.0)),
        method=method,
        samples=joint.samples,
        seed=joint.seed if sampled else None,
        body_kind=body.kind,
        dim=body.dim,
        metadata=joint.metadata[0],
    )


def xi_profile(
    body: Body, r_grid: Sequence[float], budget: Optional[SamplingBudget] = None
) -> Tuple[List[float], JointEstimate]:
    """r -> gamma_n(r M) on a grid, every grid point drawn from the same stream."""
    if not body.is_star_shaped:
        raise ValueError(f"{body.kind} body is not star-shaped")
    radii = [float(r) for r in r_grid]
    if any(r <= 0.0 for r in radii):
        raise ValueError("dilation radii must be positive")
    dilates = [Dilate(r, body) for r in radii]
    return radii, measure_many(dilates, budget)
