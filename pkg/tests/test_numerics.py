"""Contour routing, quadrature along routed paths, Richardson extrapolation"""

import math

import numpy as np
import pytest

from cvk.core.numerics import (
    ContourPath,
    Orientation,
    PoleSequence,
    QuadratureSettings,
    circle_mean,
    circle_nodes,
    crossing_counts,
    ensure_finite,
    fixed_rule_integral,
    integrate_along,
    richardson_extrapolate,
    route_contour,
)
from cvk.errors import ContourBlocked, ExtrapolationUnstable, NonFiniteSample


def _seq(anchor, orientation, label=""):
    return PoleSequence(anchor, orientation, 0.7, 1 / 0.7, label)


def test_ensure_finite():
    assert ensure_finite(1.5) == 1.5 + 0j
    with pytest.raises(NonFiniteSample):
        ensure_finite(complex("nan"))


def test_pole_sequence_members():
    seq = _seq(0.2 - 0.1j, Orientation.UPWARD)
    members = seq.members(5)
    assert members[0] == pytest.approx(0.2 - 0.1j)
    assert np.all(members.imag >= -0.1 - 1e-12)
    with pytest.raises(ValueError):
        PoleSequence(0j, Orientation.UPWARD, 0.0, 1.0)


def test_straight_path_when_anchors_are_far():
    path = route_contour([_seq(0.5j, Orientation.UPWARD)], [_seq(-1.5j, Orientation.DOWNWARD)], (-1.0, 0.0), 0.05)
    assert path.vertices == ()
    assert path.left_height == pytest.approx(-0.5)


def test_notch_keeps_clearance():
    up = _seq(0.3 - 0.6j, Orientation.UPWARD, "up")
    down = _seq(-1.2j, Orientation.DOWNWARD, "down")
    path = route_contour([up], [down], (-1.0, 0.0), 0.05)
    assert path.vertices
    assert float(path.height_at(np.array([0.3]))[0]) <= -0.65 + 1e-12
    assert path.separates([up], [down], 0.05)


def test_blocked_contour():
    up = _seq(0.1 - 0.5j, Orientation.UPWARD, "up")
    down = _seq(0.1 - 0.45j, Orientation.DOWNWARD, "down")
    with pytest.raises(ContourBlocked, match="overlap"):
        route_contour([up], [down], (-1.0, 0.0), 0.05)


def test_gaussian_integral_on_shifted_line():
    path = ContourPath((), -0.3, -0.3)
    settings = QuadratureSettings(decay_rate=2.0)
    value, err = integrate_along(lambda z: np.exp(-z * z), path, settings)
    assert abs(value - math.sqrt(math.pi)) < 1e-10
    assert err < 1e-8
    oracle = fixed_rule_integral(lambda z: np.exp(-z * z), path, settings)
    assert abs(oracle - math.sqrt(math.pi)) < 1e-10


def test_notched_path_gives_the_same_integral():
    up = _seq(0.2 - 0.5j, Orientation.UPWARD, "up")
    path = route_contour([up], [], (-1.0, 0.0), 0.05)
    settings = QuadratureSettings(decay_rate=2.0)
    value, _ = integrate_along(lambda z: np.exp(-z * z), path, settings)
    assert abs(value - math.sqrt(math.pi)) < 1e-10


@pytest.mark.parametrize("kwargs", [{"rel_tol": 0}, {"abs_tol": -1}, {"decay_rate": 0}, {"max_subdivisions": 0}])
def test_quadrature_settings_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSettings(**kwargs)


def test_richardson_removes_linear_error():
    samples = [2.0 + 3.0 * h for h in (0.1, 0.05, 0.025)]
    estimate, tableau = richardson_extrapolate(samples)
    assert estimate == pytest.approx(2.0, abs=1e-13)
    assert len(tableau) == 3


def test_richardson_quadratic_error_is_reduced():
    samples = [1.0 + h + h * h for h in (0.1, 0.05, 0.025)]
    estimate, _ = richardson_extrapolate(samples)
    assert abs(estimate - 1.0) < 1e-4


def test_richardson_unstable():
    with pytest.raises(ExtrapolationUnstable):
        richardson_extrapolate([1.0, 1.1, 1.5])
    with pytest.raises(ValueError):
        richardson_extrapolate([1.0])


def test_crossing_counts_for_overlapping_anchors():
    up = _seq(0.1 - 0.5j, Orientation.UPWARD, "up")
    down = _seq(0.1 - 0.45j, Orientation.DOWNWARD, "down")
    assert crossing_counts([up], [down], 0.05, Orientation.UPWARD) == {"up": 1}
    assert crossing_counts([up], [down], 0.05, Orientation.DOWNWARD) == {"down": 1}


def test_crossing_counts_skip_distant_anchors():
    up = _seq(0.1 - 0.5j, Orientation.UPWARD, "up")
    down = _seq(0.8 - 0.45j, Orientation.DOWNWARD, "down")
    assert crossing_counts([up], [down], 0.05, Orientation.UPWARD) == {}
    below = _seq(0.1 - 1.5j, Orientation.DOWNWARD, "below")
    assert crossing_counts([up], [below], 0.05, Orientation.UPWARD) == {}


def test_crossing_counts_cover_every_member_below_the_line():
    up = PoleSequence(-0.2 - 1.0j, Orientation.UPWARD, 0.7, 0.75, "up")
    down = _seq(-0.2 - 0.3j, Orientation.DOWNWARD, "down")
    # offsets 0, 0.7 and 0.75 lie below -0.3 + 2 * clearance
    assert crossing_counts([up], [down], 0.05, Orientation.UPWARD) == {"up": 3}


def test_tilted_tails():
    path = ContourPath((complex(-0.5, -0.2), complex(0.5, -0.3)), -0.2, -0.3)
    tilted = path.with_tails(2.0, 0.5, -1.0)
    assert tilted.vertices[0] == complex(-2.0, -0.2)
    assert tilted.vertices[-1] == complex(2.0, -0.3)
    heights = tilted.height_at(np.array([-3.0, 0.0, 4.0]))
    assert heights == pytest.approx([0.3, -0.25, -2.3])
    with pytest.raises(ValueError):
        path.with_tails(0.4)
    with pytest.raises(ValueError):
        ContourPath((), 0.0, 0.0, left_slope=1.0)


def test_gaussian_integral_on_tilted_tails():
    path = ContourPath((complex(-0.5, -0.2), complex(0.5, -0.3)), -0.2, -0.3).with_tails(1.5, 0.4, 0.4)
    settings = QuadratureSettings(decay_rate=2.0)
    value, _ = integrate_along(lambda z: np.exp(-z * z), path, settings)
    assert abs(value - math.sqrt(math.pi)) < 1e-10


def test_circle_mean_recovers_the_centre():
    nodes = circle_nodes(0.01, 8)
    assert np.abs(nodes) == pytest.approx([0.01] * 8)
    assert np.all(np.abs(nodes.imag) > 0)
    samples = [3 - 1j + 2 * e + e ** 2 - 5 * e ** 7 for e in nodes]
    assert circle_mean(samples) == pytest.approx(3 - 1j, abs=1e-14)


def test_circle_arguments():
    with pytest.raises(ValueError):
        circle_nodes(0.0, 8)
    with pytest.raises(ValueError):
        circle_nodes(0.1, 1)
    with pytest.raises(ValueError):
        circle_mean([1.0])
