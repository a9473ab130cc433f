"""Variance inequalities for the Gaussian measure restricted to a body."""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.bodies.interfaces import Body
from src.checks.verdicts import DEFAULT_POLICY, VerdictPolicy, delta_std_error, make_result
from src.core.gaussmeasure import monte_carlo_integrals
from src.models.estimates import SamplingBudget
from src.models.reports import CheckResult

logger = logging.getLogger(__name__)


def _squared_norm(points: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", points, points)


def check_b_variance(
    body: Body,
    budget: SamplingBudget,
    case: str = "b-variance",
    policy: VerdictPolicy = DEFAULT_POLICY,
) -> CheckResult:
    """Var_{gamma_K}(|x|^2) <= 2 E_{gamma_K}|x|^2, both sides from one stream."""
    joint = monte_carlo_integrals(
        body,
        budget,
        {
            "second": _squared_norm,
            "fourth": lambda x: _squared_norm(x) ** 2,
        },
    )
    p, a, b = (float(v) for v in joint.values)
    second = a / p
    variance = b / p - second**2
    # margin = 2a/p - b/p + a^2/p^2 as a function of (p, a, b)
    gradient = [
        -2.0 * a / p**2 + b / p**2 - 2.0 * a**2 / p**3,
        2.0 / p + 2.0 * a / p**2,
        -1.0 / p,
    ]
    lhs_gradient = [-2.0 * a / p**2, 2.0 / p, 0.0]
    rhs_gradient = [-b / p**2 + 2.0 * a**2 / p**3, -2.0 * a / p**2, 1.0 / p]
    return make_result(
        "b-variance",
        case,
        2.0 * second,
        variance,
        margin_std_error=delta_std_error(gradient, joint.covariance),
        lhs_std_error=delta_std_error(lhs_gradient, joint.covariance),
        rhs_std_error=delta_std_error(rhs_gradient, joint.covariance),
        policy=policy,
        theorem_backed=body.is_origin_symmetric and body.is_convex,
        inputs={"body": body.describe()},
        provenance=[joint.estimate(0)],
    )


@dataclass(frozen=True)
class OddCubic:
    """f(x) = <a, x> + sum_i b_i x_i^3 + sum_{i != j} c_ij x_i x_j^2."""

    linear: np.ndarray
    cubic: np.ndarray
    mixed: np.ndarray

    @classmethod
    def random(cls, rng: np.random.Generator, dim: int) -> "OddCubic":
        mixed = rng.standard_normal((dim, dim))
        np.fill_diagonal(mixed, 0.0)
        return cls(
            linear=rng.standard_normal(dim),
            cubic=rng.standard_normal(dim),
            mixed=mixed,
        )

    @classmethod
    def family(cls, seed: int, dim: int, count: int) -> List["OddCubic"]:
        rng = np.random.default_rng(seed)
        return [cls.random(rng, dim) for _ in range(count)]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        squares = points**2
        return (
            points @ self.linear
            + (points**3) @ self.cubic
            + np.einsum("ij,mi,mj->m", self.mixed, points, squares)
        )

    def gradient(self, points: np.ndarray) -> np.ndarray:
        squares = points**2
        # d/dx_k of sum_{i != j} c_ij x_i x_j^2
        from_first = squares @ self.mixed.T
        from_second = 2.0 * points * (points @ self.mixed)
        return self.linear + 3.0 * squares * self.cubic + from_first + from_second


def check_brascamp_lieb(
    body: Body,
    budget: SamplingBudget,
    functions: Optional[List[OddCubic]] = None,
    seed: int = 0,
    count: int = 4,
    case: str = "brascamp-lieb",
    policy: VerdictPolicy = DEFAULT_POLICY,
) -> List[CheckResult]:
    """Var_{gamma_K}(f) <= E_{gamma_K}|grad f|^2 for odd cubic f on a convex body."""
    functions = functions or OddCubic.family(seed, body.dim, count)
    results = []
    for index, f in enumerate(functions):
        joint = monte_carlo_integrals(
            body,
            budget,
            {
                "f": f,
                "f2": lambda x, f=f: f(x) ** 2,
                "grad2": lambda x, f=f: _squared_norm(f.gradient(x)),
            },
        )
        p, s1, s2, g = (float(v) for v in joint.values)
        mean = s1 / p
        variance = s2 / p - mean**2
        energy = g / p
        # margin = g/p - s2/p + s1^2/p^2 as a function of (p, s1, s2, g)
        gradient = [
            -g / p**2 + s2 / p**2 - 2.0 * s1**2 / p**3,
            2.0 * s1 / p**2,
            -1.0 / p,
            1.0 / p,
        ]
        results.append(
            make_result(
                "brascamp-lieb",
                f"{case}-f{index}",
                energy,
                variance,
                margin_std_error=delta_std_error(gradient, joint.covariance),
                lhs_std_error=delta_std_error([-g / p**2, 0.0, 0.0, 1.0 / p], joint.covariance),
                rhs_std_error=delta_std_error(
                    [-s2 / p**2 + 2.0 * s1**2 / p**3, -2.0 * s1 / p**2, 1.0 / p, 0.0],
                    joint.covariance,
                ),
                policy=policy,
                theorem_backed=body.is_convex,
                inputs={"body": body.describe(), "function": index},
                provenance=[joint.estimate(0)],
                extra={"mean": mean},
            )
        )
    return results
