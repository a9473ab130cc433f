"""Tests for the radial special functions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from src.core.special import (
    ball_second_moment,
    gamma_ratio,
    gauss_constant,
    interval_measure,
    interval_second_moment,
    phi_inv,
    psi_n,
    psi_n_inv,
    psi_n_inv_slope,
    psi_n_prime,
    validate_psi_identity,
)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 8), r=st.floats(0.0, 12.0))
def test_psi_matches_scipy_incomplete_gamma(n, r):
    assert psi_n(r, n) == pytest.approx(special.gammainc(0.5 * n, 0.5 * r * r), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 6), p=st.floats(1e-6, 0.999))
def test_psi_inverse_round_trip(n, p):
    assert psi_n(psi_n_inv(p, n), n) == pytest.approx(p, abs=1e-12)


def test_planar_and_linear_closed_forms():
    """Psi_2(r) = 1 - exp(-r^2/2) and Psi_1(r) = erf(r / sqrt 2)."""
    radii = np.linspace(0.0, 5.0, 11)
    np.testing.assert_allclose(psi_n(radii, 2), 1.0 - np.exp(-0.5 * radii**2), atol=1e-14)
    np.testing.assert_allclose(psi_n(radii, 1), special.erf(radii / math.sqrt(2.0)), atol=1e-14)


def test_gauss_constants():
    assert gauss_constant(2) == pytest.approx(1.0)
    assert gauss_constant(1) == pytest.approx(math.sqrt(2.0 / math.pi))
    assert psi_n_prime(1.0, 2) == pytest.approx(math.exp(-0.5))


def test_psi_identity_against_quadrature():
    assert validate_psi_identity(3, np.array([0.1, 0.5, 1.0, 2.0, 4.0])) < 1e-10


def test_ball_second_moment_in_the_plane():
    """int_{rho B} |x|^2 d gamma_2 = 2 (1 - exp(-x)(1 + x)) with x = rho^2 / 2."""
    for rho in (0.3, 1.0, 2.5):
        x = 0.5 * rho * rho
        assert ball_second_moment(rho, 2) == pytest.approx(2.0 * (1.0 - math.exp(-x) * (1.0 + x)))
    assert ball_second_moment(math.inf, 4) == 4.0
    assert ball_second_moment(0.0, 3) == 0.0


def test_gamma_ratio_limits():
    assert gamma_ratio(2, 1e-3) < 1e-5
    assert gamma_ratio(2, 40.0) == pytest.approx(1.0)
    # E_{gamma_{rB}} |x|^2 = n * ratio
    r = 1.3
    assert 3.0 * gamma_ratio(3, r) == pytest.approx(ball_second_moment(r, 3) / psi_n(r, 3))


def test_interval_helpers():
    assert interval_measure(1.0) == pytest.approx(0.6826894921370859)
    assert float(interval_second_moment(math.inf)) == 1.0


def test_inverse_functions_reject_invalid_probabilities():
    with pytest.raises(ValueError):
        psi_n_inv(1.5, 2)
    with pytest.raises(ValueError):
        psi_n_inv(-0.1, 2)
    with pytest.raises(ValueError):
        phi_inv(1.5)
    with pytest.raises(ValueError):
        psi_n(-1.0, 2)


def test_full_measure_inverts_to_an_infinite_radius():
    assert psi_n_inv(1.0, 2) == math.inf
    assert psi_n_inv(0.0, 3) == 0.0
    assert psi_n_inv_slope(math.inf, 2) == 0.0
    assert psi_n_inv_slope(1.0, 2) == pytest.approx(1.0 / float(psi_n_prime(1.0, 2)))
