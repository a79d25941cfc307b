import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from circumnav.geometry import (
    Vec2,
    line_of_sight,
    rot2,
    segments_intersect,
    wrap_angle,
    wrap_positive,
)
from circumnav.world import ObstacleSegment

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def test_wrap_angle_range():
    for x in np.linspace(-20, 20, 401):
        w = wrap_angle(float(x))
        assert -math.pi < w <= math.pi


@given(finite)
def test_wrap_angle_periodic(x):
    assert wrap_angle(x + 2 * math.pi) == pytest.approx(wrap_angle(x), abs=1e-9)


def test_wrap_angle_boundary():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)


@given(finite)
def test_wrap_positive_range(x):
    assert 0.0 <= wrap_positive(x) < 2 * math.pi


def test_rot2_is_rotation():
    r = rot2(0.3)
    assert np.allclose(r @ r.T, np.eye(2))
    assert np.linalg.det(r) == pytest.approx(1.0)


def test_los_blocked_example():
    wall = ObstacleSegment(a=Vec2(0, 1), b=Vec2(2, 1))
    assert not line_of_sight(Vec2(1, 2), Vec2(1, 0), [wall])


def test_los_clear_example():
    wall = ObstacleSegment(a=Vec2(0, 1), b=Vec2(2, 1))
    assert line_of_sight(Vec2(3, 2), Vec2(3, 0), [wall])


def test_los_no_obstacles():
    assert line_of_sight(Vec2(-5, 2), Vec2(7, -3), [])


def test_los_endpoint_grazing_blocked():
    # the sight line touches the wall's endpoint: conservative -> blocked
    wall = ObstacleSegment(a=Vec2(1, 1), b=Vec2(2, 1))
    assert not line_of_sight(Vec2(1, 2), Vec2(1, 0), [wall])


@given(finite, finite, finite, finite)
def test_los_symmetric(ax, ay, bx, by):
    wall = ObstacleSegment(a=Vec2(0, 1), b=Vec2(2, 1))
    a, b = Vec2(ax, ay), Vec2(bx, by)
    assert line_of_sight(a, b, [wall]) == line_of_sight(b, a, [wall])


def test_segments_cross():
    assert segments_intersect(Vec2(0, 0), Vec2(2, 2), Vec2(0, 2), Vec2(2, 0))
    assert not segments_intersect(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 1))


def test_segments_collinear_overlap():
    assert segments_intersect(Vec2(0, 0), Vec2(2, 0), Vec2(1, 0), Vec2(3, 0))
    assert not segments_intersect(Vec2(0, 0), Vec2(1, 0), Vec2(2, 0), Vec2(3, 0))


def test_vec2_arithmetic():
    v = Vec2(3, 4)
    assert v.norm() == pytest.approx(5.0)
    assert (v - Vec2(1, 1)) == Vec2(2, 3)
    assert (2.0 * v) == Vec2(6, 8)
    assert v.dot(Vec2(1, 0)) == pytest.approx(3.0)
    assert Vec2.from_array(v.as_array()) == v
