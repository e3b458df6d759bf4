"""q-Pochhammer symbols, basic hypergeometric series and the two finite sums"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cvk.core.qaskey import hahn, jacobi
from cvk.core.qseries import (
    csum,
    phi,
    qpoch,
    qpoch_multi,
    root_of_unity_order,
    sigma_hahn,
    sigma_jacobi,
    termination_index,
)
from cvk.errors import DenominatorVanishes, NonTerminating

Q = 0.45 + 0.2j
ALPHA, BETA, GAMMA = 0.3 + 0.1j, -0.4 + 0.2j, 0.6 - 0.3j


def test_qpoch_basics():
    assert qpoch(0.5, 0.3, 0) == 1
    assert qpoch(0.5, 0.3, 2) == pytest.approx((1 - 0.5) * (1 - 0.15))
    assert qpoch_multi([0.5, 0.2], 0.3, 1) == pytest.approx(0.5 * 0.8)
    with pytest.raises(ValueError):
        qpoch(0.5, 0.3, -1)


@pytest.mark.parametrize("a, q, n", [(0.5, 0.3, 4), (ALPHA, Q, 7), (-1.2 + 0.4j, 0.9 * cmath.exp(1.1j), 12)])
def test_qpoch_against_mpmath(a, q, n):
    mpmath = pytest.importorskip("mpmath")
    assert qpoch(a, q, n) == pytest.approx(complex(mpmath.qp(a, q, n)), rel=1e-12)


@given(st.floats(min_value=-2, max_value=2), st.integers(0, 6), st.integers(0, 6))
@settings(max_examples=60)
def test_qpoch_splits(a, m, n):
    q = 0.7 * cmath.exp(0.4j)
    assert qpoch(a, q, m + n) == pytest.approx(qpoch(a, q, m) * qpoch(a * q ** m, q, n), rel=1e-11, abs=1e-13)


def test_csum_cancellation():
    assert csum([1e16, 1.0, -1e16]) == 1.0


def test_termination_index():
    assert termination_index([Q ** -3, 0.2], Q) == 3
    assert termination_index([0.2, 0.3], Q) is None


def test_root_of_unity_order():
    assert root_of_unity_order(cmath.exp(2j * math.pi / 5), 10) == 5
    assert root_of_unity_order(cmath.exp(2j * math.pi * math.sqrt(2)), 64) is None


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_chu_vandermonde(n):
    a, c = 0.7 + 0.2j, -0.3 + 0.5j
    lhs = phi([Q ** (-n), a], [c], Q, Q)
    rhs = qpoch(c / a, Q, n) / qpoch(c, Q, n) * a ** n
    assert abs(lhs - rhs) < 1e-11 * max(1, abs(rhs))


def test_q_binomial_theorem():
    a, z = 0.4 - 0.1j, 0.3 + 0.2j
    lhs = phi([a], [], Q, z)
    rhs = qpoch(a * z, Q, 200) / qpoch(z, Q, 200)
    assert abs(lhs - rhs) < 1e-12


def test_nonterminating_outside_disc():
    with pytest.raises(NonTerminating):
        phi([0.2, 0.3], [0.4], Q, 1.5)


def test_vanishing_denominator():
    with pytest.raises(DenominatorVanishes):
        phi([Q ** -3], [Q ** -1], Q, 0.5)


@pytest.mark.parametrize("n", [0, 1, 2, 4])
def test_sigma_hahn_even_is_hahn_with_swapped_roles(n):
    z = 1.3 + 0.2j
    got = sigma_hahn(n, 2, ALPHA, BETA, GAMMA, z, Q)
    want = hahn(n, z, GAMMA, BETA, ALPHA, Q)
    assert abs(got - want) < 1e-11 * max(1, abs(want))


@pytest.mark.parametrize("n", [0, 1, 2, 4])
def test_sigma_hahn_odd_argument(n):
    z = 1.3 + 0.2j
    got = sigma_hahn(n, 1, ALPHA, BETA, GAMMA, z, Q)
    want = phi([Q ** (-n), GAMMA * z, GAMMA / z], [BETA * GAMMA, ALPHA * GAMMA], Q, ALPHA * BETA * Q ** n)
    assert abs(got - want) < 1e-11 * max(1, abs(want))


@pytest.mark.parametrize("n", [0, 1, 3])
def test_sigma_jacobi_both_parities(n):
    x = 0.8 - 0.4j
    even = sigma_jacobi(n, 2, ALPHA, BETA, GAMMA, x, Q)
    assert abs(even - jacobi(n, x, ALPHA, BETA, GAMMA, Q)) < 1e-11 * max(1, abs(even))
    odd = sigma_jacobi(n, 1, ALPHA, BETA, GAMMA, x, Q)
    want = jacobi(n, 1 / x, 1 / ALPHA, 1 / BETA, 1 / GAMMA, 1 / Q)
    assert abs(odd - want) < 1e-11 * max(1, abs(want))


def test_sigma_sums_reject_bad_arguments():
    with pytest.raises(ValueError):
        sigma_hahn(-1, 2, ALPHA, BETA, GAMMA, 1.0, Q)
    with pytest.raises(ValueError):
        sigma_jacobi(2, 3, ALPHA, BETA, GAMMA, 1.0, Q)


@given(st.floats(min_value=0.1, max_value=0.9), st.floats(min_value=-3, max_value=3))
@settings(max_examples=40)
def test_unimodular_q_terminating(b, phase):
    q = cmath.exp(2j * math.pi * b * b)
    assume(root_of_unity_order(q, 600, tol=1e-9) is None)
    a = 0.5 * cmath.exp(1j * phase)
    lhs = phi([q ** -2, a], [a * q], q, q)
    rhs = qpoch(q, q, 2) / qpoch(a * q, q, 2) * a ** 2
    assert abs(lhs - rhs) < 1e-9 * max(1, abs(rhs))


# q = exp(2 pi i b^2) at b = 0.7 satisfies q^100 = 1
Q_GOLDEN = cmath.exp(2j * math.pi * 0.49)
Q_UNIT = cmath.exp(2j * math.pi * (0.5 + math.sqrt(2) / 10) ** 2)


def _rng_points(seed, count, low, high):
    rng = np.random.default_rng(seed)
    radii = rng.uniform(low, high, size=count)
    phases = rng.uniform(-math.pi, math.pi, size=count)
    return [complex(r * cmath.exp(1j * t)) for r, t in zip(radii, phases)]


def test_termination_at_root_of_unity_takes_first_zero():
    assert root_of_unity_order(Q_GOLDEN, 200, tol=1e-9) == 100
    assert termination_index([Q_GOLDEN ** -3, 0.2], Q_GOLDEN) == 3
    assert termination_index([0.2, Q_GOLDEN ** -7, Q_GOLDEN ** -5], Q_GOLDEN) == 5


@pytest.mark.parametrize("n", range(1, 9))
def test_chu_vandermonde_at_golden_q(n):
    a, c = 0.7 + 0.2j, -0.3 + 1.5j
    lhs = phi([Q_GOLDEN ** (-n), a], [c], Q_GOLDEN, Q_GOLDEN)
    rhs = qpoch(c / a, Q_GOLDEN, n) / qpoch(c, Q_GOLDEN, n) * a ** n
    assert abs(lhs - rhs) < 1e-11 * max(1, abs(rhs))


@pytest.mark.parametrize("n", range(0, 9))
def test_finite_sums_at_golden_q(n):
    alpha, beta, gamma = -cmath.exp(0.9), -cmath.exp(-0.6), -cmath.exp(1.1)
    z = cmath.exp(0.4 + 0.2j)
    even = sigma_hahn(n, 2, alpha, beta, gamma, z, Q_GOLDEN)
    assert abs(even - hahn(n, z, gamma, beta, alpha, Q_GOLDEN)) < 1e-11 * max(1, abs(even))
    odd = sigma_jacobi(n, 1, alpha, beta, gamma, z, Q_GOLDEN)
    want = jacobi(n, 1 / z, 1 / alpha, 1 / beta, 1 / gamma, 1 / Q_GOLDEN)
    assert abs(odd - want) < 1e-11 * max(1, abs(want))


@pytest.mark.parametrize("seed", range(5))
def test_pochhammer_reversal(seed):
    for m, a in enumerate(_rng_points(seed, 11, 0.6, 1.6)):
        lhs = qpoch(Q_GOLDEN ** (1 - m) / a, Q_GOLDEN, m) * (-a) ** m * Q_GOLDEN ** (m * (m - 1) // 2)
        rhs = qpoch(a, Q_GOLDEN, m)
        assert abs(lhs - rhs) < 1e-12 * max(1, abs(rhs))


@pytest.mark.parametrize("seed", range(5))
def test_pochhammer_inverse_base(seed):
    for n, a in enumerate(_rng_points(seed + 10, 11, 0.6, 1.6)):
        lhs = qpoch(a, 1 / Q_GOLDEN, n)
        rhs = qpoch(1 / a, Q_GOLDEN, n) * (-a) ** n * Q_GOLDEN ** (-(n * (n - 1) // 2))
        assert abs(lhs - rhs) < 1e-12 * max(1, abs(rhs))


@pytest.mark.parametrize("n", range(0, 9))
def test_terminating_three_phi_two_transformation(n):
    b, c = _rng_points(n, 2, 0.6, 0.8)
    d, e = _rng_points(n + 50, 2, 1.4, 1.8)
    rhs = phi([Q_UNIT ** (-n), b, c], [d, e], Q_UNIT, Q_UNIT)
    s = d * e / (b * c)
    lhs = (qpoch(s, Q_UNIT, n) / qpoch(e, Q_UNIT, n) * (b * c / d) ** n
           * phi([Q_UNIT ** (-n), d / b, d / c], [d, s], Q_UNIT, Q_UNIT))
    assert abs(lhs - rhs) < 1e-11 * max(1, abs(rhs))


@pytest.mark.parametrize("n", range(0, 7))
def test_two_sided_three_phi_two_transform(n):
    alpha, beta, gamma = _rng_points(n + 100, 3, 1.3, 1.6)
    z = cmath.exp(1j * (0.3 + n))
    q = Q_UNIT
    lhs = (qpoch(gamma * beta, q, n) / qpoch(alpha * beta, q, n)
           * phi([q ** (-n), gamma * z, gamma / z], [beta * gamma, alpha * gamma], q, alpha * beta * q ** n))
    rhs = phi([q ** (-n), alpha / z, alpha * z], [alpha * beta, alpha * gamma], q, beta * gamma * q ** n)
    assert abs(lhs - rhs) < 1e-11 * max(1, abs(rhs))


@pytest.mark.parametrize("n", range(0, 7))
def test_finite_sum_lemmas_on_random_draws(n):
    alpha, beta, gamma = _rng_points(n + 200, 3, 1.3, 1.6)
    z, x = _rng_points(n + 300, 2, 0.7, 1.4)
    q = Q_UNIT
    even = sigma_hahn(n, 2, alpha, beta, gamma, z, q)
    want = phi([q ** (-n), gamma * z, gamma / z], [beta * gamma, alpha * gamma], q, q)
    assert abs(even - want) < 1e-11 * max(1, abs(want))
    odd = sigma_hahn(n, 1, alpha, beta, gamma, z, q)
    want = phi([q ** (-n), gamma * z, gamma / z], [beta * gamma, alpha * gamma], q, alpha * beta * q ** n)
    assert abs(odd - want) < 1e-11 * max(1, abs(want))
    jac = sigma_jacobi(n, 2, alpha, beta, gamma, x, q)
    assert abs(jac - jacobi(n, x, alpha, beta, gamma, q)) < 1e-11 * max(1, abs(jac))
