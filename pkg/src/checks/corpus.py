"""Seeded corpora of check cases and their JSON files."""

import json
import logging
import math
from pathlib import Path
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np
from pydantic import TypeAdapter, ValidationError

from src.bodies.combinations import minkowski_combine
from src.bodies.interfaces import Body
from src.bodies.kinds import Ball, Box, Ellipsoid, Halfspace, SymPolytope
from src.bodies.serialization import body_to_spec
from src.core.errors import SchemaError
from src.models.check_case import CheckCase

logger = logging.getLogger(__name__)

MAX_HALF_VERTICES = 8
MAX_CONDITION = 20.0
EHRHARD_EVERY = 10

_CASES = TypeAdapter(List[CheckCase])


def random_polytope(rng: np.random.Generator, n: int) -> SymPolytope:
    """2k vertices (k <= 8) with random directions and lengths in [0.5, 2]."""
    k = int(rng.integers(max(n, 2), MAX_HALF_VERTICES + 1))
    directions = rng.standard_normal((k, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    lengths = rng.uniform(0.5, 2.0, size=k)
    return SymPolytope(tuple(map(tuple, np.round(directions * lengths[:, None], 6))))


def random_ellipsoid(rng: np.random.Generator, n: int) -> Ellipsoid:
    """Semi-axes with condition number at most 20."""
    smallest = rng.uniform(0.3, 1.0)
    ratios = np.exp(rng.uniform(0.0, math.log(MAX_CONDITION), size=n))
    ratios[int(rng.integers(n))] = 1.0
    return Ellipsoid(tuple(np.round(smallest * ratios, 6)))


def random_box(rng: np.random.Generator, n: int) -> Box:
    return Box(tuple(np.round(rng.uniform(0.2, 2.0, size=n), 6)))


def random_ball(rng: np.random.Generator, n: int) -> Ball:
    return Ball(n=n, radius=round(float(rng.uniform(0.3, 2.5)), 6))


def random_mixture(rng: np.random.Generator, n: int) -> Body:
    mu = round(float(rng.uniform(0.2, 0.8)), 4)
    return minkowski_combine(mu, random_polytope(rng, n), random_ellipsoid(rng, n))


Generator = Callable[[np.random.Generator, int], Body]

PAIR_PLANS: Tuple[Tuple[str, Generator, Generator], ...] = (
    ("polytopes", random_polytope, random_polytope),
    ("ellipsoid-box", random_ellipsoid, random_box),
    ("boxes", random_box, random_box),
    ("polytope-ellipsoid", random_polytope, random_ellipsoid),
    ("ball-ellipsoid", random_ball, random_ellipsoid),
    ("mixture-ball", random_mixture, random_ball),
)


def _ehrhard_case(rng: np.random.Generator, n: int, lam: float, name: str) -> CheckCase:
    normal = rng.standard_normal(n)
    normal /= np.linalg.norm(normal)
    normal = tuple(np.round(normal, 6))
    first = Halfspace(normal, round(float(rng.uniform(-1.0, 1.5)), 6))
    second = Halfspace(normal, round(float(rng.uniform(-1.0, 1.5)), 6))
    return CheckCase(
        name=name,
        first=body_to_spec(first),
        second=body_to_spec(second),
        lam=lam,
        checks=["ehrhard", "log-concavity"],
    )


def generate_corpus(
    seed: int,
    count: int = 200,
    dims: Sequence[int] = (2, 3, 4),
    lambdas: Sequence[float] = (0.25, 0.5, 0.75),
) -> List[CheckCase]:
    """Seeded symmetric convex pairs cycling through dimensions, weights and body families.

    Every tenth case is a parallel-halfspace pair for the Ehrhard equality
    check and every seventh pair uses K = L.
    """
    rng = np.random.default_rng(seed)
    cases: List[CheckCase] = []
    for index in range(count):
        n = int(dims[index % len(dims)])
        lam = float(lambdas[(index // len(dims)) % len(lambdas)])
        if index % EHRHARD_EVERY == EHRHARD_EVERY - 1:
            cases.append(_ehrhard_case(rng, n, lam, f"case-{index:04d}-n{n}-halfspaces"))
            continue
        label, make_first, make_second = PAIR_PLANS[index % len(PAIR_PLANS)]
        if label == "mixture-ball" and n != 2:
            label, make_first, make_second = "ball-ellipsoid", random_ball, random_ellipsoid
        first = make_first(rng, n)
        second = first if index % 7 == 0 else make_second(rng, n)
        if second is first:
            label = f"{label}-same"
        cases.append(
            CheckCase(
                name=f"case-{index:04d}-n{n}-{label}",
                first=body_to_spec(first),
                second=body_to_spec(second),
                lam=lam,
            )
        )
    logger.debug(f"Generated {len(cases)} cases from seed {seed}")
    return cases


def load_corpus(path: Union[str, Path]) -> List[CheckCase]:
    """Read a JSON array of check cases; OSError propagates for unreadable files."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        cases = _CASES.validate_python(json.loads(text))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON ({e})") from e
    except ValidationError as e:
        raise SchemaError(f"{path}: invalid check case document\n{e}") from e
    names = [case.name for case in cases]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise SchemaError(f"{path}: duplicate case names {duplicates}")
    logger.debug(f"Loaded {len(cases)} cases from {path}")
    return cases


def save_corpus(cases: Sequence[CheckCase], path: Union[str, Path]) -> None:
    payload = [case.model_dump(mode="json", exclude_defaults=True) for case in cases]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
