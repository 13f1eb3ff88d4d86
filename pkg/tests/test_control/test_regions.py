import numpy as np
import pytest

from gcckit.control import (
    create_arc_region,
    create_ball_region,
    create_box_region,
    create_endpoint_region,
    create_expression_region,
    create_interval_region,
    create_region,
    create_strip_region,
    create_whole_region,
)
from gcckit.enums import RegionKind
from gcckit.errors import ConfigurationError
from gcckit.geometry import create_disc, create_interval, create_unit_square


def test_interval_region_is_open():
    region = create_interval_region(0.3, 0.6)
    assert region.kind == RegionKind.INTERIOR
    assert region.contains([0.45])
    assert not region.contains([0.3])
    assert not region.contains([0.7])
    assert region.width == pytest.approx(0.3)


def test_dilation_grows_the_region():
    region = create_interval_region(0.3, 0.6).dilate(0.05)
    assert not region.contains([0.27])
    assert region.contains([0.27], dilated=True)
    assert not region.contains([0.2], dilated=True)
    with pytest.raises(ConfigurationError):
        region.dilate(-1.0)


def test_interior_shapes_agree_on_a_square():
    points = np.array([[0.1, 0.5], [0.5, 0.5], [0.9, 0.9]])
    strip = create_strip_region(0, hi=0.3)
    box = create_box_region([0.0, 0.0], [0.3, 1.0])
    expression = create_expression_region("0.3 - x1", 2)
    for region in (strip, box, expression):
        np.testing.assert_array_equal(region.values(points) > 0, [True, False, False])

    ball = create_ball_region([0.5, 0.5], 0.2)
    np.testing.assert_array_equal(ball.values(points) > 0, [False, True, False])
    assert ball.width == pytest.approx(0.4)


def test_whole_region_contains_the_closure():
    square = create_unit_square()
    region = create_whole_region(square)
    assert region.contains([0.0, 0.0])
    assert region.contains([0.5, 0.99])


def test_arc_wraps_around_the_circle():
    disc = create_disc()
    arc = create_arc_region(disc, 6.0, 0.5)
    assert arc.kind == RegionKind.BOUNDARY
    assert arc.contains(0.0)
    assert arc.contains(6.2)
    assert not arc.contains(3.0)
    assert arc.width == pytest.approx(0.5 + 2 * np.pi - 6.0)


def test_endpoint_region():
    region = create_endpoint_region(create_interval(), [0.0])
    assert region.contains(0.0)
    assert not region.contains(1.0)


def test_region_factory():
    region = create_region("interval", 0.1, 0.2)
    assert region.contains([0.15])
    with pytest.raises(ConfigurationError):
        create_region("triangle")
    with pytest.raises(ConfigurationError):
        create_interval_region(0.6, 0.3)
