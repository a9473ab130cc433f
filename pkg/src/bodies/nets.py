"""Deterministic direction nets on the unit sphere.

Nets are antipodally symmetric (every direction comes with its negative, bit for
bit) so that membership decided on a net keeps origin symmetry exactly.
"""

import math
from functools import lru_cache
from typing import Optional

import numpy as np
from pydantic import ValidationError
from scipy.special import gammaln, ndtri
from scipy.stats import qmc

from src.core.errors import ConfigurationError
from src.models.settings import Settings


def default_net_size(dim: int, settings: Optional[Settings] = None) -> int:
    """Net size for ``dim`` from GBM_NET_SIZE_*; the 1-D net is always {-1, +1}."""
    if dim == 1:
        return 2
    if settings is None:
        try:
            settings = Settings()
        except ValidationError as e:
            raise ConfigurationError(f"invalid GBM_* settings\n{e}") from e
    return settings.net_size(dim)


def _half_circle(count: int) -> np.ndarray:
    angles = np.pi * np.arange(count) / count
    return np.column_stack([np.cos(angles), np.sin(angles)])


def _fibonacci_hemisphere(count: int) -> np.ndarray:
    # Fibonacci lattice restricted to z > 0; the other half comes from negation
    index = np.arange(count) + 0.5
    z = index / count
    radius = np.sqrt(1.0 - z * z)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    azimuth = golden * index
    return np.column_stack([radius * np.cos(azimuth), radius * np.sin(azimuth), z])


def _sobol_half(dim: int, count: int) -> np.ndarray:
    m = max(1, int(math.ceil(math.log2(count))))
    sampler = qmc.Sobol(d=dim, scramble=True, seed=0)
    uniforms = sampler.random_base2(m)[:count]
    uniforms = np.clip(uniforms, 1e-12, 1.0 - 1e-12)
    gaussian = ndtri(uniforms)
    return gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)


@lru_cache(maxsize=32)
def _net(dim: int, size: int) -> np.ndarray:
    half = max(1, size // 2)
    if dim == 1:
        base = np.ones((1, 1))
    elif dim == 2:
        base = _half_circle(half)
    elif dim == 3:
        base = _fibonacci_hemisphere(half)
    else:
        base = _sobol_half(dim, half)
    net = np.vstack([base, -base])
    net.setflags(write=False)
    return net


def direction_net(dim: int, size: int = 0) -> np.ndarray:
    """Read-only array of shape (size, dim) of unit directions."""
    return _net(dim, size or default_net_size(dim))


def net_resolution(dim: int, size: int = 0) -> float:
    """Typical angular gap (radians) between a direction and the net."""
    size = size or default_net_size(dim)
    if dim == 1:
        return 0.0
    if dim == 2:
        return math.pi / size
    log_area = math.log(2.0) + 0.5 * dim * math.log(math.pi) - float(gammaln(0.5 * dim))
    return float(math.exp((log_area - math.log(size)) / (dim - 1)))
