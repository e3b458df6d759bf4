#!/usr/bin/env python3
"""Double sine s_b and hyperbolic gamma g_b"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from cvk.core.special_functions import (
    BParameter,
    ValueKind,
    gb,
    gb_integral,
    gb_log,
    sb,
    sb_asymptotic,
    sb_from_gb,
    sb_integral,
    sb_log,
    sb_pole,
    sb_residue,
    sb_shift,
)
from cvk.errors import DomainError

B_VALUES = [0.5 + math.sqrt(2) / 10, 0.7, 1.3]


def _sb(z, bp, order=("b", "binv")):
    return complex(np.exp(sb_log(z, bp, order)))


class TestBParameter:
    def test_derived_quantities(self):
        bp = BParameter(0.7)
        assert bp.Q == pytest.approx(0.7 + 1 / 0.7)
        assert bp.c == pytest.approx(1 + 6 * bp.Q ** 2)
        assert abs(bp.q) == pytest.approx(1.0)
        assert bp.small == pytest.approx(0.7)
        assert bp.large == pytest.approx(1 / 0.7)

    @pytest.mark.parametrize("b", [0.0, -1.0, float("inf")])
    def test_rejects_bad_b(self, b):
        with pytest.raises(DomainError):
            BParameter(b)

    def test_root_of_unity_flag(self, caplog):
        assert BParameter(1.0).root_of_unity
        assert "lattice poles may collide" in caplog.text
        assert not BParameter(0.7).root_of_unity


@pytest.mark.parametrize("b", B_VALUES)
def test_sb_at_zero_is_one(b):
    value = sb(0, BParameter(b))
    assert value.kind is ValueKind.FINITE
    assert abs(value.value - 1) < 1e-10


@pytest.mark.parametrize("b", B_VALUES)
def test_functional_equations(b):
    bp = BParameter(b)
    for z in (0.3 + 0.1j, -0.6 + 0.05j, 1.1 - 0.2j):
        for s in (bp.b, 1 / bp.b):
            ratio = _sb(z + 0.5j * s, bp) / _sb(z - 0.5j * s, bp)
            want = 2 * cmath.cosh(math.pi * s * z)
            assert abs(ratio - want) < 1e-10 * max(1, abs(want))


@pytest.mark.slow
@pytest.mark.parametrize("b", B_VALUES)
def test_functional_equations_on_a_grid(b):
    bp = BParameter(b)
    rng = np.random.default_rng(17)
    points = rng.uniform(-1.2, 1.2, size=200) + 1j * rng.uniform(-0.2, 0.2, size=200)
    for z in points:
        for s in (bp.b, 1 / bp.b):
            ratio = _sb(z + 0.5j * s, bp) / _sb(z - 0.5j * s, bp)
            want = 2 * cmath.cosh(math.pi * s * z)
            assert abs(ratio - want) < 1e-10 * max(1, abs(want))


@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-0.3, max_value=0.3),
       st.sampled_from(B_VALUES))
@settings(max_examples=200, deadline=None)
def test_inversion(x, y, b):
    bp = BParameter(b)
    z = complex(x, y * bp.Q / 2)
    assert abs(_sb(z, bp) * _sb(-z, bp) - 1) < 1e-10


@given(st.floats(min_value=-4, max_value=4), st.sampled_from(B_VALUES))
@settings(max_examples=200, deadline=None)
def test_unitarity_on_real_line(x, b):
    assert abs(abs(_sb(x, BParameter(b))) - 1) < 1e-10


@given(st.floats(min_value=-2, max_value=2), st.floats(min_value=-0.3, max_value=0.3))
@settings(max_examples=200, deadline=None)
def test_b_to_inverse_symmetry(x, y):
    b = 0.7
    z = complex(x, y)
    assert abs(_sb(z, BParameter(b)) - _sb(z, BParameter(1 / b))) < 1e-10


@pytest.mark.parametrize("b", B_VALUES)
def test_step_order_invariance(b):
    bp = BParameter(b)
    z = 0.4 + 1.7j * bp.Q
    a = _sb(z, bp, ("b", "binv"))
    c = _sb(z, bp, ("binv", "b"))
    assert abs(a - c) < 1e-10 * max(1, abs(a))


@pytest.mark.parametrize("b", B_VALUES)
def test_strip_values_match_the_integral(b):
    bp = BParameter(b)
    z = 0.35 - 0.1j
    assert abs(_sb(z, bp) - sb_integral(z, bp)) < 1e-10
    with pytest.raises(DomainError):
        sb_integral(1j * bp.Q, bp)


@pytest.mark.parametrize("b", B_VALUES)
def test_reflection_through_gb(b):
    bp = BParameter(b)
    for z in (0.2 + 0.1j, -0.5 - 0.05j):
        assert abs(sb_from_gb(z, bp) - _sb(z, bp)) < 1e-10


def test_gb_functional_equation():
    bp = BParameter(0.7)
    z = 0.3 + 0.2j
    b = bp.b
    ratio = cmath.exp(gb_log(z + 0.5j * b, bp) - gb_log(z - 0.5j * b, bp))
    want = b ** (-1j * b * z) * math.sqrt(2 * math.pi) / complex(gamma(0.5 - 1j * b * z))
    assert abs(ratio - want) < 1e-10 * max(1, abs(want))
    assert abs(cmath.exp(gb_log(z, bp)) - gb_integral(z, bp)) < 1e-10


@pytest.mark.parametrize("b", B_VALUES)
def test_asymptotic_form(b):
    bp = BParameter(b)
    z = 8.0 + 0.1j
    got = sb_log(z, bp)
    want = sb_asymptotic(z, bp, 1)
    assert abs(cmath.exp(got - want) - 1) < 1e-6


def test_zero_and_pole_lattice():
    bp = BParameter(0.7)
    zero = sb(0.5j * bp.Q, bp)
    assert zero.value == 0 and zero.order == 1
    pole = sb(-0.5j * bp.Q - 1j * bp.b, bp)
    assert pole.is_pole and pole.order == 1
    with pytest.raises(DomainError):
        pole.finite()
    assert gb(-0.5j * bp.Q, bp).is_pole


@pytest.mark.parametrize("m,l", [(0, 0), (1, 0), (0, 1), (2, 1)])
def test_residues_against_circle_oracle(m, l):
    bp = BParameter(0.5 + math.sqrt(2) / 10)
    center = sb_pole(m, l, bp)
    radius, count = 0.02, 96
    angles = 2 * math.pi * np.arange(count) / count
    points = center + radius * np.exp(1j * angles)
    values = np.exp(sb_log(points, bp))
    oracle = complex(np.mean(values * radius * np.exp(1j * angles)))
    assert abs(sb_residue(m, l, bp) - oracle) < 1e-9
    if (m, l) == (0, 0):
        assert sb_residue(0, 0, bp) == pytest.approx(0.5j / math.pi)


def test_shift_closed_form_matches_functional_equation():
    bp = BParameter(0.7)
    x = 0.2 - 0.3j
    single = sb_shift(x, 1, 0, bp)
    assert abs(single - 2 * cmath.cosh(math.pi * bp.b * (x + 0.5j * bp.b))) < 1e-12
    two_steps = sb_shift(x, 2, 1, bp)
    assert abs(two_steps - _sb(x + 2j * bp.b + 1j / bp.b, bp) / _sb(x, bp)) < 1e-9 * abs(two_steps)
