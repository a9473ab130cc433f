"""Brunn-Minkowski type inequalities for the Gaussian measure.

Every check estimates gamma(lam K + (1-lam) L), gamma(K) and gamma(L) from one
point stream and compares a transform T of the combination with the convex
combination of the transformed measures.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.bodies.combinations import geometric_mean, minkowski_combine
from src.bodies.interfaces import Body
from src.bodies.kinds import Box
from src.checks.verdicts import DEFAULT_POLICY, VerdictPolicy, delta_std_error, make_result
from src.core.gaussmeasure import measure_many
from src.core.sigma import SigmaTable, sigma_eval, sigma_prime_eval
from src.core.special import normal_density, phi_inv, psi_n_inv, psi_n_inv_slope
from src.models.estimates import MeasureEstimate, SamplingBudget
from src.models.reports import CheckResult

logger = logging.getLogger(__name__)

Transform = Callable[[float], float]

EXPONENT_RATIOS = (1.5, 2.0, 3.0, 4.0, 8.0)
DEFAULT_P_GRID = tuple(np.round(np.linspace(0.02, 0.98, 49), 4))


@dataclass
class PairMeasures:
    """gamma of (combination, K, L) with their joint covariance."""

    values: np.ndarray
    covariance: np.ndarray
    provenance: List[MeasureEstimate]

    @classmethod
    def estimate(cls, bodies: Sequence[Body], budget: Optional[SamplingBudget]) -> "PairMeasures":
        joint = measure_many(bodies, budget)
        return cls(values=joint.values, covariance=joint.covariance, provenance=joint.estimates())

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.maximum(np.diag(self.covariance), 0.0))


def pair_measures(
    first: Body, second: Body, lam: float, budget: Optional[SamplingBudget]
) -> PairMeasures:
    return PairMeasures.estimate([minkowski_combine(lam, first, second), first, second], budget)


def _inputs(first: Body, second: Body, lam: float, **more) -> dict:
    inputs = {"first": first.describe(), "second": second.describe(), "lam": lam}
    inputs.update(more)
    return inputs


def combination_check(
    check: str,
    case: str,
    measures: PairMeasures,
    lam: float,
    transform: Transform,
    derivative: Transform,
    policy: VerdictPolicy = DEFAULT_POLICY,
    theorem_backed: bool = True,
    inputs: Optional[dict] = None,
    notes: Optional[List[str]] = None,
) -> CheckResult:
    """T(gamma(M)) >= lam T(gamma(K)) + (1 - lam) T(gamma(L)) with delta-method errors."""
    g_m, g_k, g_l = (float(v) for v in measures.values)
    lhs = transform(g_m)
    rhs = lam * transform(g_k) + (1.0 - lam) * transform(g_l)
    slopes = np.array([derivative(g_m), -lam * derivative(g_k), -(1.0 - lam) * derivative(g_l)])
    cov = measures.covariance
    return make_result(
        check,
        case,
        lhs,
        rhs,
        margin_std_error=delta_std_error(slopes, cov),
        lhs_std_error=delta_std_error(slopes[:1], cov[:1, :1]),
        rhs_std_error=delta_std_error(slopes[1:], cov[1:, 1:]),
        policy=policy,
        theorem_backed=theorem_backed,
        inputs=inputs,
        provenance=measures.provenance,
        notes=notes,
    )


def _power(p: float):
    def transform(g: float) -> float:
        return g**p if g > 0.0 else 0.0

    def derivative(g: float) -> float:
        return p * g ** (p - 1.0) if g > 0.0 else math.inf

    return transform, derivative


def _symmetric_convex(*bodies: Body) -> bool:
    return all(b.is_origin_symmetric and b.is_convex for b in bodies)


def check_dim_bm(
    first: Body,
    second: Body,
    lam: float,
    budget: Optional[SamplingBudget] = None,
    delta: float = 1.0,
    case: str = "dim-bm",
    policy: VerdictPolicy = DEFAULT_POLICY,
    measures: Optional[PairMeasures] = None,
) -> CheckResult:
    """gamma(lam K + (1-lam) L)^(delta/n) >= lam gamma(K)^(delta/n) + (1-lam) gamma(L)^(delta/n)."""
    measures = measures or pair_measures(first, second, lam, budget)
    transform, derivative = _power(delta / first.dim)
    notes = [] if delta <= 1.0 else [f"exponent {delta}/n exceeds 1/n; violations are expected"]
    return combination_check(
        "dim-bm",
        case,
        measures,
        lam,
        transform,
        derivative,
        policy,
        theorem_backed=delta <= 1.0 and _symmetric_convex(first, second),
        inputs=_inputs(first, second, lam, delta=delta),
        notes=notes,
    )


def check_exponent_optimality(
    n: int,
    delta: float,
    base: float = 0.01,
    lam: float = 0.5,
    ratios: Sequence[float] = EXPONENT_RATIOS,
    policy: VerdictPolicy = DEFAULT_POLICY,
) -> CheckResult:
    """Search small box pairs aQ, bQ for a violation of the delta/n-exponent inequality."""
    if delta <= 1.0:
        raise ValueError(f"exponent optimality needs delta > 1, got {delta}")
    small = Box(tuple([base] * n))
    results = []
    for ratio in ratios:
        large = Box(tuple([base * ratio] * n))
        result = check_dim_bm(
            small, large, lam, None, delta, case=f"box-pair-{ratio:g}", policy=policy
        )
        results.append((result.margin / max(result.rhs, 1e-300), ratio, result))
    relative, ratio, worst = min(results, key=lambda item: item[0])
    worst.check = "exponent-optimality"
    worst.case = f"n{n}-delta{delta:g}"
    worst.extra = {"ratio": ratio, "relative_margin": relative, "expected": "violated"}
    logger.debug(f"Exponent {delta}/{n}: worst ratio {ratio}, relative margin {relative:.3e}")
    return worst


def check_ehrhard(
    first: Body,
    second: Body,
    lam: float,
    budget: Optional[SamplingBudget] = None,
    case: str = "ehrhard",
    policy: VerdictPolicy = DEFAULT_POLICY,
    measures: Optional[PairMeasures] = None,
) -> CheckResult:
    """Phi^-1(gamma(lam K + (1-lam) L)) >= lam Phi^-1(gamma K) + (1-lam) Phi^-1(gamma L)."""
    measures = measures or pair_measures(first, second, lam, budget)

    def derivative(g: float) -> float:
        return 1.0 / float(normal_density(phi_inv(g)))

    return combination_check(
        "ehrhard",
        case,
        measures,
        lam,
        lambda g: float(phi_inv(g)),
        derivative,
        policy,
        theorem_backed=first.is_convex and second.is_convex,
        inputs=_inputs(first, second, lam),
    )


def check_log_concavity(
    first: Body,
    second: Body,
    lam: float,
    budget: Optional[SamplingBudget] = None,
    case: str = "log-concavity",
    policy: VerdictPolicy = DEFAULT_POLICY,
    measures: Optional[PairMeasures] = None,
) -> CheckResult:
    """log gamma(lam K + (1-lam) L) >= lam log gamma(K) + (1-lam) log gamma(L)."""
    measures = measures or pair_measures(first, second, lam, budget)
    return combination_check(
        "log-concavity",
        case,
        measures,
        lam,
        lambda g: math.log(g) if g > 0.0 else -math.inf,
        lambda g: 1.0 / g if g > 0.0 else math.inf,
        policy,
        theorem_backed=first.is_convex and second.is_convex,
        inputs=_inputs(first, second, lam),
    )


def check_sigma_refinement(
    first: Body,
    second: Body,
    lam: float,
    table: SigmaTable,
    budget: Optional[SamplingBudget] = None,
    case: str = "sigma-refinement",
    policy: VerdictPolicy = DEFAULT_POLICY,
    measures: Optional[PairMeasures] = None,
) -> CheckResult:
    """sigma(gamma(lam K + (1-lam) L)) >= lam sigma(gamma K) + (1-lam) sigma(gamma L).

    The 1/n-exponent check on the same estimates is attached under
    ``extra["chain"]``: a non-negative sigma margin must come with a
    non-negative dimensional margin.
    """
    if table.n != first.dim:
        raise ValueError(f"sigma_{table.n} table used in dimension {first.dim}")
    measures = measures or pair_measures(first, second, lam, budget)
    result = combination_check(
        "sigma-refinement",
        case,
        measures,
        lam,
        lambda g: float(sigma_eval(table, g)),
        lambda g: float(sigma_prime_eval(table, g)),
        policy,
        theorem_backed=_symmetric_convex(first, second),
        inputs=_inputs(first, second, lam, sigma_nodes=table.nodes),
    )
    dimensional = check_dim_bm(first, second, lam, case=case, policy=policy, measures=measures)
    tolerance = policy.exact_tolerance
    result.extra["chain"] = {
        "sigma_margin": result.margin,
        "dim_bm_margin": dimensional.margin,
        "dim_bm_verdict": dimensional.verdict,
        "implication_holds": not (
            result.margin >= -tolerance and dimensional.margin < -tolerance
        ),
    }
    return result


def check_log_bm(
    first: Body,
    second: Body,
    lam: float,
    budget: Optional[SamplingBudget],
    case: str = "log-bm",
    policy: VerdictPolicy = DEFAULT_POLICY,
) -> CheckResult:
    """gamma(K^lam L^(1-lam)) >= gamma(K)^lam gamma(L)^(1-lam) on geometric-mean bodies."""
    measures = PairMeasures.estimate([geometric_mean(lam, first, second), first, second], budget)
    g_g, g_k, g_l = (float(v) for v in measures.values)
    rhs = g_k**lam * g_l ** (1.0 - lam)
    slopes = np.array([1.0, -lam * rhs / g_k, -(1.0 - lam) * rhs / g_l])
    cov = measures.covariance
    return make_result(
        "log-bm",
        case,
        g_g,
        rhs,
        margin_std_error=delta_std_error(slopes, cov),
        lhs_std_error=float(measures.std_errors[0]),
        rhs_std_error=delta_std_error(slopes[1:], cov[1:, 1:]),
        policy=policy,
        theorem_backed=first.dim == 2 and _symmetric_convex(first, second),
        inputs=_inputs(first, second, lam),
        provenance=measures.provenance,
        notes=[
            "geometric-mean membership uses a finite direction net, an outer "
            "approximation: the left side is biased upward"
        ],
    )


def _chain_coefficient(lam: float, p: float) -> float:
    return (lam / p) ** p * ((1.0 - lam) / (1.0 - p)) ** (1.0 - p)


def check_geomean_chain(
    first: Body,
    second: Body,
    lam: float,
    budget: Optional[SamplingBudget] = None,
    p_grid: Sequence[float] = DEFAULT_P_GRID,
    case: str = "geomean-chain",
    policy: VerdictPolicy = DEFAULT_POLICY,
    measures: Optional[PairMeasures] = None,
) -> CheckResult:
    """Psi^-1(gamma(lam K + (1-lam) L)) >= sup_p c(p) Psi^-1(gamma(K)^p gamma(L)^(1-p)).

    c(p) = (lam/p)^p ((1-lam)/(1-p))^(1-p); the sup is taken over ``p_grid``
    together with p = lam, where c = 1.
    """
    n = first.dim
    measures = measures or pair_measures(first, second, lam, budget)
    g_m, g_k, g_l = (float(v) for v in measures.values)
    lhs = psi_n_inv(g_m, n)

    best = None
    for p in sorted(set(float(p) for p in p_grid) | {lam}):
        if not 0.0 < p < 1.0:
            continue
        mixed = g_k**p * g_l ** (1.0 - p)
        value = _chain_coefficient(lam, p) * psi_n_inv(mixed, n)
        if best is None or value > best[0]:
            best = (value, p, mixed)
    rhs, p_star, mixed = best
    coefficient = _chain_coefficient(lam, p_star)
    inner = coefficient * psi_n_inv_slope(psi_n_inv(mixed, n), n)
    slopes = np.array(
        [
            psi_n_inv_slope(lhs, n),
            -inner * p_star * mixed / g_k,
            -inner * (1.0 - p_star) * mixed / g_l,
        ]
    )
    cov = measures.covariance
    return make_result(
        "geomean-chain",
        case,
        lhs,
        rhs,
        margin_std_error=delta_std_error(slopes, cov),
        lhs_std_error=delta_std_error(slopes[:1], cov[:1, :1]),
        rhs_std_error=delta_std_error(slopes[1:], cov[1:, 1:]),
        policy=policy,
        theorem_backed=n == 2 and _symmetric_convex(first, second),
        inputs=_inputs(first, second, lam, p_grid_size=len(p_grid)),
        provenance=measures.provenance,
        extra={"p_star": p_star, "coefficient": coefficient},
    )
