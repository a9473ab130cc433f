"""Tests for Gaussian measure and moment estimates."""

import math

import numpy as np
import pytest
from scipy import special

from src.bodies import (
    ball,
    box,
    cross_polytope,
    ellipsoid,
    geometric_mean,
    halfspace,
    minkowski_combine,
    slab,
)
from src.core.errors import ConfigurationError, SamplingError
from src.core.gaussmeasure import (
    estimate_metadata,
    measure,
    measure_many,
    normalized_second_moment,
    requires_sampling,
    second_moment,
    xi_profile,
)
from src.core.special import ball_second_moment, psi_n
from src.models.estimates import EstimationMethod, SamplingBudget


def test_exact_ball_and_box_measures():
    """Balls, boxes and halfspaces never need sampling."""
    estimate = measure(ball(3, 1.5))
    assert estimate.method == EstimationMethod.EXACT
    assert estimate.std_error == 0.0
    assert estimate.seed is None
    assert estimate.value == pytest.approx(special.gammainc(1.5, 1.125), abs=1e-13)

    widths = box(1.0, 2.0)
    expected = special.erf(1.0 / math.sqrt(2.0)) * special.erf(2.0 / math.sqrt(2.0))
    assert measure(widths).value == pytest.approx(expected, abs=1e-14)
    assert measure(halfspace((0.0, 1.0), 0.5)).value == pytest.approx(special.ndtr(0.5))


def test_slab_measure_and_moment():
    thin = slab(3, 0.2, cap=2.0)
    mass = special.erf(0.2 / math.sqrt(2.0)) * psi_n(2.0, 2)
    assert measure(thin).value == pytest.approx(mass, abs=1e-13)
    assert second_moment(thin).method == EstimationMethod.EXACT


def test_planar_quadrature_matches_rotated_square():
    """The unit cross-polytope is a square of half-width 1/sqrt(2) turned by 45 degrees."""
    estimate = measure(cross_polytope(2, 1.0))
    assert estimate.method == EstimationMethod.QUADRATURE
    assert estimate.value == pytest.approx(special.erf(0.5) ** 2, abs=1e-10)


def test_quadrature_of_round_ellipsoids():
    disk = measure(ellipsoid(1.0, 1.0))
    assert disk.value == pytest.approx(1.0 - math.exp(-0.5), abs=1e-10)
    sphere = measure(ellipsoid(1.0, 1.0, 1.0))
    assert sphere.method == EstimationMethod.SPHERE_QUADRATURE
    assert sphere.value == pytest.approx(psi_n(1.0, 3), abs=1e-10)
    moment = second_moment(ellipsoid(2.0, 2.0))
    assert moment.value == pytest.approx(ball_second_moment(2.0, 2), abs=1e-9)


def test_reducible_combinations_are_exact():
    combo = minkowski_combine(0.5, ball(2, 1.0), ball(2, 3.0))
    assert requires_sampling(combo) is False
    assert measure(combo).value == pytest.approx(psi_n(2.0, 2))


def test_monte_carlo_agrees_with_closed_form(small_budget):
    square = box(1.0, 1.0)
    sampled = measure(square, small_budget, force_sampling=True)
    exact = measure(square).value
    assert sampled.method == EstimationMethod.MONTE_CARLO
    assert sampled.seed == small_budget.seed
    assert sampled.samples == small_budget.samples
    assert sampled.std_error > 0.0
    assert abs(sampled.value - exact) < 5.0 * sampled.std_error


def test_results_do_not_depend_on_worker_count():
    square = box(0.8, 1.3)
    one = measure(square, SamplingBudget(samples=50_000, seed=11, workers=1), force_sampling=True)
    three = measure(square, SamplingBudget(samples=50_000, seed=11, workers=3), force_sampling=True)
    assert one.value == three.value
    assert one.std_error == three.std_error


def test_common_random_numbers_correlate_nested_bodies(small_budget):
    joint = measure_many([box(1.0, 1.0), box(1.1, 1.1)], small_budget, force_sampling=True)
    cov = joint.covariance
    correlation = cov[0, 1] / math.sqrt(cov[0, 0] * cov[1, 1])
    assert correlation > 0.8
    assert len(joint.estimates()) == 2


def test_sampling_needs_a_budget_and_a_seed():
    mean = geometric_mean(0.5, box(1.0, 2.0), ellipsoid(2.0, 1.0))
    assert requires_sampling(mean) is True
    with pytest.raises(SamplingError):
        measure(mean)
    with pytest.raises(ConfigurationError):
        measure(mean, SamplingBudget(samples=1000))


def test_too_few_hits_are_refused():
    with pytest.raises(SamplingError):
        measure(ball(2, 0.01), SamplingBudget(samples=1000, seed=1), force_sampling=True)


def test_normalized_second_moment_of_a_ball():
    estimate = normalized_second_moment(ball(4, 1.2))
    assert estimate.value == pytest.approx(ball_second_moment(1.2, 4) / psi_n(1.2, 4))
    assert estimate.std_error == 0.0


def test_geometric_means_are_flagged_as_upper_bounds():
    metadata = estimate_metadata(geometric_mean(0.5, box(1.0, 2.0), ellipsoid(2.0, 1.0)))
    assert metadata["approximate"] is True
    assert metadata["bias"] == "upper"
    assert metadata["net_resolution"] > 0.0


def test_xi_profile_of_a_ball_is_psi():
    radii, joint = xi_profile(ball(2, 1.0), [0.5, 1.0, 2.0])
    np.testing.assert_allclose(joint.values, psi_n(np.array(radii), 2), atol=1e-13)
