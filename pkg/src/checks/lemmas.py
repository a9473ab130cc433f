"""Ball comparison lemmas, the equality case and dilation profiles."""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from src.bodies.combinations import Dilate, minkowski_combine
from src.bodies.interfaces import Body
from src.bodies.kinds import Ball
from src.bodies.serialization import body_to_spec
from src.checks.inequalities import check_dim_bm
from src.checks.verdicts import DEFAULT_POLICY, VerdictPolicy, delta_std_error, make_result
from src.core.gaussmeasure import canonical, estimate_terms, measure_many, xi_profile
from src.core.sigma import chord_defects
from src.core.special import (
    ball_second_moment,
    psi_n,
    psi_n_inv,
    psi_n_inv_slope,
    psi_n_prime,
)
from src.models.estimates import Quantity, SamplingBudget
from src.models.reports import CheckResult, EqualityCaseReport, XiProfileReport

logger = logging.getLogger(__name__)

DEFAULT_T_GRID = (0.25, 0.5, 0.75, 1.0)
DEFAULT_EPS = (0.0, 0.05, 0.1, 0.2, 0.4)
AFFINE_TOLERANCE = 1e-7


def check_ball_second_moment(
    body: Body,
    budget: Optional[SamplingBudget] = None,
    case: str = "ball-second-moment",
    policy: VerdictPolicy = DEFAULT_POLICY,
) -> CheckResult:
    """int_K |x|^2 d gamma >= int_{rho B} |x|^2 d gamma where gamma(rho B) = gamma(K)."""
    if not body.is_star_shaped:
        raise ValueError(f"{body.kind} body is not star-shaped")
    joint = estimate_terms(
        [(body, Quantity.PROBABILITY), (body, Quantity.SECOND_MOMENT)], budget
    )
    p, moment = (float(v) for v in joint.values)
    rho = psi_n_inv(p, body.dim)
    rhs = ball_second_moment(rho, body.dim)
    # d/dp of the ball moment at fixed measure p is rho^2
    weight = rho * rho if math.isfinite(rho) else 0.0
    slopes = np.array([-weight, 1.0])
    cov = joint.covariance
    return make_result(
        "ball-second-moment",
        case,
        moment,
        rhs,
        margin_std_error=delta_std_error(slopes, cov),
        lhs_std_error=float(joint.std_errors[1]),
        rhs_std_error=weight * float(joint.std_errors[0]),
        policy=policy,
        theorem_backed=True,
        inputs={"body": body.describe(), "rho": rho},
        provenance=joint.estimates(),
    )


def check_dilate_lemma(
    body: Body,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    budget: Optional[SamplingBudget] = None,
    case: str = "dilate-lemma",
    policy: VerdictPolicy = DEFAULT_POLICY,
) -> List[CheckResult]:
    """gamma(tA) >= gamma(t rho B) for t in (0, 1], where gamma(rho B) = gamma(A)."""
    if not body.is_star_shaped:
        raise ValueError(f"{body.kind} body is not star-shaped")
    factors = [float(t) for t in t_grid]
    if any(not 0.0 < t <= 1.0 for t in factors):
        raise ValueError("dilation factors must lie in (0, 1]")
    dilates: List[Body] = [Dilate(t, body) for t in factors]
    joint = measure_many([body] + dilates, budget)
    n = body.dim
    p = float(joint.values[0])
    rho = psi_n_inv(p, n)
    provenance = joint.estimates()

    results = []
    for i, t in enumerate(factors, start=1):
        rhs = float(psi_n(t * rho, n))
        # d/dp psi_n(t psi_n^-1(p))
        slope = t * psi_n_prime(t * rho, n) * psi_n_inv_slope(rho, n)
        gradient = np.zeros(len(factors) + 1)
        gradient[i] = 1.0
        gradient[0] = -slope
        results.append(
            make_result(
                "dilate-lemma",
                f"{case}-t{t:g}",
                float(joint.values[i]),
                rhs,
                margin_std_error=delta_std_error(gradient, joint.covariance),
                lhs_std_error=float(joint.std_errors[i]),
                rhs_std_error=slope * float(joint.std_errors[0]),
                policy=policy,
                theorem_backed=True,
                inputs={"body": body.describe(), "t": t, "rho": rho},
                provenance=[provenance[0], provenance[i]],
            )
        )
    return results


def check_equality_case(
    body: Body,
    lam: float = 0.5,
    eps_list: Sequence[float] = DEFAULT_EPS,
    budget: Optional[SamplingBudget] = None,
    policy: VerdictPolicy = DEFAULT_POLICY,
) -> EqualityCaseReport:
    """Dimensional margins of (K, L_eps) with L_eps = (1-eps) K + eps B shrink to 0 with eps."""
    eps_values = sorted(float(e) for e in eps_list)
    if any(not 0.0 <= e < 1.0 for e in eps_values):
        raise ValueError("perturbation sizes must lie in [0, 1)")
    unit = Ball(n=body.dim, radius=1.0)
    margins = []
    for eps in eps_values:
        other = body if eps == 0.0 else canonical(minkowski_combine(1.0 - eps, body, unit))
        result = check_dim_bm(body, other, lam, budget, case=f"eps-{eps:g}", policy=policy)
        margins.append(result.margin)
    tolerance = policy.exact_tolerance
    return EqualityCaseReport(
        body=body_to_spec(body),
        lam=lam,
        eps=eps_values,
        margins=margins,
        monotone=bool(np.all(np.diff(margins) >= -tolerance)),
        zero_at_zero=eps_values[0] > 0.0 or abs(margins[0]) <= tolerance,
        all_nonnegative=bool(min(margins) >= -tolerance),
    )


def profile_shape(defects: np.ndarray, scale: float, tolerance: float = AFFINE_TOLERANCE) -> str:
    band = tolerance * max(scale, 1.0)
    if len(defects) == 0 or np.max(np.abs(defects)) <= band:
        return "affine"
    if np.min(defects) >= -band:
        return "concave"
    return "non-concave"


def check_xi_profile(
    body: Body,
    r_grid: Sequence[float],
    budget: Optional[SamplingBudget] = None,
) -> XiProfileReport:
    """Probe concavity of the dilation profile against balls.

    For each dilation s the equal-measure ball radius is r(s) = Psi_n^-1(gamma(sM));
    the sampled curve is s as a function of r, affine exactly for centered balls.
    """
    radii, joint = xi_profile(body, r_grid, budget)
    measures = [float(v) for v in joint.values]
    ball_radii = [psi_n_inv(min(m, 1.0 - 1e-16), body.dim) for m in measures]
    x = np.asarray(ball_radii)
    defects = chord_defects(x, np.asarray(radii)) if len(x) >= 3 else np.array([])
    shape = profile_shape(defects, float(np.max(radii)))
    logger.debug(f"Xi profile of {body.describe()}: {shape}")
    return XiProfileReport(
        body=body_to_spec(body),
        radii=radii,
        measures=measures,
        ball_radii=ball_radii,
        chord_defects=[float(d) for d in defects],
        shape=shape,
    )
