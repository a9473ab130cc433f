"""Tests for bodies and their oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.bodies import (
    Ball,
    Box,
    Direction,
    SymPolytope,
    ball,
    box,
    check_sublinearity,
    contains,
    cross_polytope,
    dilate,
    ellipsoid,
    geometric_mean,
    halfspace,
    minkowski_combine,
    radial,
    slab,
    support,
    union,
)
from src.bodies.nets import direction_net
from src.bodies.serialization import dumps_body, loads_body
from src.core.errors import DegenerateBodyError, DimensionMismatchError, SchemaError


def test_direction_normalizes_vectors():
    """Direction.from_vector returns a unit vector."""
    direction = Direction.from_vector([3.0, 4.0])
    assert direction.components == pytest.approx((0.6, 0.8))
    with pytest.raises(ValueError):
        Direction((1.0, 1.0))


def test_ball_and_box_oracles():
    """Support, membership and radial values of the primitive kinds."""
    assert support(ball(2, 2.0), [3.0, 4.0]) == pytest.approx(10.0)
    assert support(box(1.0, 2.0), [1.0, 1.0]) == pytest.approx(3.0)
    assert contains(box(1.0, 2.0), [0.5, 1.9]) is True
    assert contains(box(1.0, 2.0), [1.1, 0.0]) is False
    assert radial(ellipsoid(2.0, 1.0), [1.0, 0.0]) == pytest.approx(2.0)
    assert radial(ellipsoid(2.0, 1.0), [0.0, 1.0]) == pytest.approx(1.0)


def test_cross_polytope_radial_from_facets():
    diamond = cross_polytope(2, 1.0)
    unit = np.array([1.0, 1.0]) / math.sqrt(2.0)
    assert support(diamond, unit) == pytest.approx(1.0 / math.sqrt(2.0))
    assert radial(diamond, unit) == pytest.approx(1.0 / math.sqrt(2.0))


def test_vectorized_oracles_match_single_calls(square):
    """Oracles accept an (m, n) array and return one value per row."""
    points = np.array([[0.0, 0.0], [0.9, -0.9], [1.5, 0.0]])
    assert list(contains(square, points)) == [True, True, False]
    assert support(square, points).shape == (3,)


def test_dimension_mismatch_is_rejected(unit_disk):
    with pytest.raises(DimensionMismatchError):
        support(unit_disk, [1.0, 0.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        minkowski_combine(0.5, unit_disk, ball(3, 1.0))


def test_degenerate_bodies_are_rejected():
    with pytest.raises(DegenerateBodyError):
        ball(2, 0.0)
    with pytest.raises(DegenerateBodyError):
        box(1.0, -1.0)
    with pytest.raises(DegenerateBodyError):
        minkowski_combine(1.0, ball(2, 1.0), ball(2, 2.0))


def test_minkowski_combinations_reduce_to_primitives():
    """Balls with balls and boxes with boxes reduce exactly."""
    assert minkowski_combine(0.5, ball(2, 1.0), ball(2, 3.0)).reduced() == Ball(2, 2.0)
    reduced = minkowski_combine(0.25, box(1.0, 2.0), box(3.0, 2.0)).reduced()
    assert isinstance(reduced, Box)
    assert reduced.half_widths == pytest.approx((2.5, 2.0))
    assert minkowski_combine(0.3, ellipsoid(1.0, 2.0), ellipsoid(1.0, 2.0)).reduced() == ellipsoid(
        1.0, 2.0
    )


def test_polytope_combinations_use_net_membership():
    """Polytope pairs have no primitive form; their membership comes from the net."""
    square_polytope = SymPolytope(((1.0, 1.0), (1.0, -1.0)))
    combo = minkowski_combine(0.5, cross_polytope(2, 1.0), square_polytope)
    assert combo.reduced() is None
    assert combo.approximate is True
    assert support(combo, [1.0, 0.0]) == pytest.approx(1.0)
    points = np.array([[0.99, 0.0], [1.01, 0.0]])
    assert list(combo.membership(points)) == [True, False]


def test_net_membership_of_combination():
    """An ellipse plus a square has no primitive form; membership uses the net."""
    combo = minkowski_combine(0.5, ellipsoid(2.0, 1.0), box(1.0, 1.0))
    assert combo.reduced() is None
    assert combo.approximate is True
    points = np.array([[0.0, 0.0], [1.49, 0.0], [1.51, 0.0], [5.0, 5.0]])
    assert list(combo.membership(points)) == [True, True, False, False]


def test_geometric_mean_of_a_body_with_itself():
    mean = geometric_mean(0.5, ball(2, 1.0), ball(2, 1.0))
    assert mean.approximate is True
    points = np.array([[0.99, 0.0], [1.01, 0.0], [0.0, -0.5]])
    assert list(mean.membership(points)) == [True, False, True]


def test_geometric_mean_support_is_sublinear():
    """An ellipse and a box: the mean's support is that of its net polytope."""
    mean = geometric_mean(0.5, ellipsoid(2.0, 1.0), box(1.0, 0.5))
    rng = np.random.default_rng(11)
    first = rng.standard_normal((256, 2))
    second = rng.standard_normal((256, 2))
    for lam in (0.2, 0.5, 0.8):
        assert check_sublinearity(mean, first, second, lam=lam) <= 1e-12

    net, bounds = mean._net
    values = mean.support_function(net)
    assert np.all(values <= bounds + 1e-9)
    points = mean.support_point(net)
    np.testing.assert_allclose(np.einsum("ij,ij->i", points, net), values, atol=1e-12)


def test_union_is_star_shaped_not_convex():
    cross = union(box(2.0, 0.1), box(0.1, 2.0))
    assert cross.is_star_shaped is True
    assert cross.is_convex is False
    assert contains(cross, [1.5, 0.0]) is True
    assert contains(cross, [0.0, -1.5]) is True
    assert contains(cross, [1.0, 1.0]) is False


def test_slab_and_halfspace():
    """The uncapped slab is unbounded across its axis; halfspaces are one-sided."""
    thin = slab(2, 0.1)
    assert contains(thin, [0.05, 100.0]) is True
    assert contains(thin, [0.1, 0.0]) is False
    assert math.isinf(support(thin, [0.0, 1.0]))

    lower = halfspace((1.0, 0.0), 0.0)
    assert lower.is_origin_symmetric is False
    assert contains(lower, [-5.0, 3.0]) is True
    assert contains(lower, [0.1, 0.0]) is False


def test_boundedness_is_decided_per_body():
    assert slab(2, 0.5).is_bounded is False
    assert slab(2, 0.5, cap=1.5).is_bounded is True
    assert slab(1, 0.5).is_bounded is True
    assert halfspace((1.0, 0.0), 1.0).is_bounded is False
    assert dilate(2.0, slab(2, 0.5, cap=1.5)).is_bounded is True
    assert union(box(1.0, 1.0), slab(2, 0.5)).is_bounded is False
    assert minkowski_combine(0.5, ball(2, 1.0), box(1.0, 2.0)).is_bounded is True


def test_dilate_scales_every_oracle(square):
    doubled = dilate(2.0, square)
    assert support(doubled, [1.0, 0.0]) == pytest.approx(2.0)
    assert contains(doubled, [1.9, 1.9]) is True
    assert radial(doubled, [0.0, 1.0]) == pytest.approx(2.0)


@settings(max_examples=25, deadline=None)
@given(
    axes=st.lists(st.floats(0.2, 5.0), min_size=2, max_size=4),
    seed=st.integers(0, 2**32 - 1),
)
def test_support_functions_are_sublinear(axes, seed):
    """h(lam a + (1 - lam) b) <= lam h(a) + (1 - lam) h(b) for ellipsoids."""
    body = ellipsoid(*axes)
    rng = np.random.default_rng(seed)
    first = rng.standard_normal((32, len(axes)))
    second = rng.standard_normal((32, len(axes)))
    assert check_sublinearity(body, first, second, lam=0.3) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(widths=st.lists(st.floats(0.1, 3.0), min_size=2, max_size=3))
def test_box_radial_function_hits_the_boundary(widths):
    """rho(theta) theta lies on the boundary: inside, and just outside when scaled up."""
    body = box(*widths)
    directions = direction_net(len(widths), 64)
    rho = body.radial_function(directions)
    boundary = directions * rho[:, None]
    assert np.all(body.membership(boundary * (1.0 - 1e-9)))
    assert not np.any(body.membership(boundary * (1.0 + 1e-6)))


def test_body_documents_round_trip():
    nested = minkowski_combine(0.4, ellipsoid(1.0, 2.0), dilate(0.5, box(1.0, 1.0)))
    assert loads_body(dumps_body(nested)) == nested


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        '{"kind": "ball", "dim": 2}',
        '{"kind": "teapot", "dim": 2, "params": {}}',
        '{"kind": "dilate", "dim": 2, "params": {"factor": 2.0}}',
    ],
)
def test_malformed_documents_raise_schema_errors(text):
    with pytest.raises(SchemaError):
        loads_body(text)


def test_declared_dimension_must_match_parameters():
    with pytest.raises(DimensionMismatchError):
        loads_body('{"kind": "box", "dim": 3, "params": {"half_widths": [1.0, 1.0]}}')
