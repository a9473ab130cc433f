"""Seeded, chunked Monte Carlo over the standard Gaussian.

Chunk ``i`` of a run with seed ``s`` always draws from the counter-based
Philox stream keyed by ``(s, i)``. Chunks are summed in index order, so a
result depends on (seed, samples) only and never on the worker count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from src.core.errors import ConfigurationError, SamplingError
from src.models.estimates import CHUNK_SIZE, SamplingBudget

logger = logging.getLogger(__name__)

Integrands = Callable[[np.ndarray], np.ndarray]


def chunk_generator(seed: int, chunk_index: int) -> np.random.Generator:
    key = np.array([seed, chunk_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def chunk_points(seed: int, chunk_index: int, count: int, dim: int) -> np.ndarray:
    return chunk_generator(seed, chunk_index).standard_normal((count, dim))


@dataclass
class SampleMoments:
    """Running first and second moments of a vector of integrand values."""

    count: int
    sums: np.ndarray
    cross: np.ndarray

    @classmethod
    def from_values(cls, values: np.ndarray) -> "SampleMoments":
        return cls(count=len(values), sums=values.sum(axis=0), cross=values.T @ values)

    def merge(self, other: "SampleMoments") -> "SampleMoments":
        return SampleMoments(
            count=self.count + other.count,
            sums=self.sums + other.sums,
            cross=self.cross + other.cross,
        )

    @property
    def mean(self) -> np.ndarray:
        return self.sums / self.count

    @property
    def mean_covariance(self) -> np.ndarray:
        """Covariance of the sample means, (E[f f^T] - E[f] E[f]^T) / N."""
        mean = self.mean
        spread = self.cross / self.count - np.outer(mean, mean)
        # clip rounding noise on the diagonal (indicator variances at p = 0 or 1)
        np.fill_diagonal(spread, np.maximum(np.diag(spread), 0.0))
        return spread / self.count


def _chunk_sizes(samples: int) -> List[int]:
    full, rest = divmod(samples, CHUNK_SIZE)
    return [CHUNK_SIZE] * full + ([rest] if rest else [])


def sample_moments(budget: SamplingBudget, dim: int, integrands: Integrands) -> SampleMoments:
    """Moments of ``integrands(points)`` (shape (m, k)) over standard normal points."""
    if budget.seed is None:
        raise ConfigurationError("Monte Carlo estimates need an explicit seed")
    if budget.samples <= 0:
        raise SamplingError("Monte Carlo estimate requested with a zero-sample budget")
    sizes = _chunk_sizes(budget.samples)
    seed = budget.seed

    def run_chunk(index: int) -> SampleMoments:
        points = chunk_points(seed, index, sizes[index], dim)
        values = np.asarray(integrands(points), dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        return SampleMoments.from_values(values)

    logger.debug(
        f"Sampling {budget.samples} points in {len(sizes)} chunks "
        f"(seed={seed}, workers={budget.workers})"
    )
    if budget.workers == 1:
        parts = [run_chunk(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=budget.workers) as executor:
            parts = list(executor.map(run_chunk, range(len(sizes))))

    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    return total
