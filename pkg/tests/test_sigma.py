"""Tests for the sigma_n tables."""

import dataclasses
import logging

import numpy as np
import pytest

from src.core.sigma import (
    build_sigma,
    certify_pow_convexity,
    chord_defects,
    convexity_margin,
    integral_residual,
    ode_residual,
    refinement_study,
    sigma_eval,
    sigma_grid,
    sigma_inverse,
    sigma_prime_eval,
    sigma_report,
    small_y_limit_error,
    tau_eval,
)
from src.core.special import psi_n

NODES = 1000


@pytest.fixture(scope="module")
def tables():
    return {n: build_sigma(n, 6.0, NODES) for n in (1, 2, 3, 4)}


def test_grid_has_an_exact_anchor_node():
    grid = sigma_grid(NODES, 6.0)
    assert len(grid) == NODES
    assert 1.0 in grid
    assert np.all(np.diff(grid) > 0.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_normalization_at_the_anchor(tables, n):
    """sigma(Psi_n(1)) = 0 and sigma'(Psi_n(1)) = 1."""
    table = tables[n]
    anchor = psi_n(1.0, n)
    assert sigma_eval(table, anchor) == pytest.approx(0.0, abs=1e-12)
    assert sigma_prime_eval(table, anchor) == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diff(table.sigma) > 0.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_residuals_are_small(tables, n):
    table = tables[n]
    assert ode_residual(table).max() <= 1e-7
    assert integral_residual(table) <= 1e-8
    assert small_y_limit_error(table) < 1e-3


def test_ode_residual_reads_the_tabulated_state(tables):
    table = tables[2]
    r = table.r_grid
    corrupted = dataclasses.replace(table, log_sigma_prime=table.log_sigma_prime + 5.0 * r**2)
    assert ode_residual(table).max() <= 1e-7
    assert ode_residual(corrupted).max() > 1e-3


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_power_convexity_certificate(tables, n):
    """y -> sigma_n(y^n) is convex and tau_n is concave on every table."""
    certificate = certify_pow_convexity(tables[n], keep_margins=False)
    assert certificate.passed
    assert certificate.min_margin >= 0.0
    assert certificate.margins == []


def test_margin_is_the_gamma_ratio_over_n():
    r = np.array([0.1, 1.0, 3.0])
    margins = convexity_margin(3, r)
    assert np.all(margins > 0.0)
    assert margins[-1] == pytest.approx(1.0 / 3.0, rel=0.2)


def test_inverse_and_tau(tables):
    table = tables[3]
    y = np.array([0.05, 0.2, 0.6, 0.9])
    np.testing.assert_allclose(sigma_inverse(table, sigma_eval(table, y)), y, rtol=1e-5)
    np.testing.assert_allclose(tau_eval(table, sigma_eval(table, y)), y ** (1.0 / 3.0), rtol=1e-5)


def test_affine_rescaling_keeps_the_certificate(tables):
    table = tables[2]
    rescaled = table.rescaled(2.0, 1.0)
    y = np.array([0.1, 0.5, 0.8])
    np.testing.assert_allclose(sigma_eval(rescaled, y), 2.0 * sigma_eval(table, y) + 1.0)
    assert certify_pow_convexity(rescaled, keep_margins=False).passed
    with pytest.raises(ValueError):
        table.rescaled(-1.0, 0.0)


def test_one_dimensional_report(tables):
    """n = 1 is checked against its closed identity and is not a multiple of log y."""
    report = sigma_report(tables[1])
    assert report.identity_deviation is not None
    assert report.identity_deviation <= 1e-6
    assert report.log_fit_deviation > 1e-3
    assert sigma_report(tables[2]).identity_deviation is None


def test_out_of_table_values_are_clamped_with_a_warning(tables, caplog):
    table = tables[2]
    with caplog.at_level(logging.WARNING, logger="src.core.sigma"):
        value = sigma_eval(table, 0.0)
    assert value == pytest.approx(table.sigma[0])
    assert "clamping" in caplog.text


def test_chord_defects_sign():
    x = np.linspace(0.0, 1.0, 11)
    assert np.all(chord_defects(x, x**2) < 0.0)
    assert np.all(chord_defects(x, np.sqrt(x + 1.0)) > 0.0)


def test_table_export(tables, tmp_path):
    path = tmp_path / "sigma.csv"
    tables[2].to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r,psi,sigma,sigma_prime"
    assert len(lines) == NODES + 1


def test_build_rejects_bad_parameters():
    with pytest.raises(ValueError):
        build_sigma(2, 10.0, NODES)
    with pytest.raises(ValueError):
        build_sigma(2, 6.0, 10)


@pytest.mark.slow
def test_refinement_changes_little():
    report = refinement_study(2, nodes=2048)
    assert report.max_change < 1e-4
