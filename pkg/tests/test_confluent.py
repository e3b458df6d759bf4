#!/usr/bin/env python3
"""Confluent kernels, their operators and the q-Hahn / q-Jacobi degenerations"""

import cmath
import math

import pytest

from cvk.errors import AssumptionViolated, DomainError, NoConvergence
from cvk.kernels import confluent as cf
from cvk.kernels.confluent import BranchedPower, ConfluentParams


class TestConfluentParams:
    def test_rejects_complex_theta(self):
        with pytest.raises(AssumptionViolated):
            ConfluentParams.create(0.7, 0.3, -0.2 + 0.1j, 0.4, 0.25, 0.35)

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            ConfluentParams.create(0.7, 0.3, -0.2, 0.4, 0.25, 0.35, k=0)

    def test_with_helpers(self, golden_confluent):
        p = golden_confluent
        assert p.with_nu(0.1).nu == 0.1
        assert p.with_k(p.k + 2).parity.sign == p.parity.sign
        assert p.dual_b().bp.b == pytest.approx(1 / 0.7)

    def test_discrete_assumption(self, golden_confluent):
        golden_confluent.check_discrete_assumption()
        with pytest.raises(AssumptionViolated, match="sigma_s"):
            golden_confluent.check_discrete_assumption(sigma_s=0)


class TestBranchedPower:
    def test_branch_offset_adds_a_full_turn(self):
        base = BranchedPower(0.5 + 0.5j, 0.3)
        turned = BranchedPower(0.5 + 0.5j, 0.3, 2 * math.pi)
        assert turned.value / base.value == pytest.approx(cmath.exp(2j * math.pi * 0.3))

    def test_zero_base(self):
        with pytest.raises(DomainError):
            BranchedPower(0, 1.5)


def test_xyz_identities(golden_confluent):
    residuals = cf.xyz_identities(golden_confluent, 0.3 + 0.1j)
    assert set(residuals) == {"X", "Y", "Z", "HX", "psiXZ"}
    for name, value in residuals.items():
        assert value < 1e-11, name


@pytest.mark.parametrize("family", ["ren", "hat"])
@pytest.mark.parametrize("variable", ["nu", "sigma_s"])
def test_conjugation(golden_confluent, family, variable):
    gaps = cf.conjugation_gap(golden_confluent, family, variable)
    assert gaps["closed_vs_direct"] < 1e-11
    assert gaps["operator"] < 1e-11


def test_conjugation_rejects_raw_family(golden_confluent):
    with pytest.raises(ValueError):
        cf.conjugation_gap(golden_confluent, "C")


def test_zero_coefficient_depends_on_parity_only(golden_confluent):
    p = golden_confluent
    a = cf.hc_zero(p, p.bp, p.nu)
    assert cf.hc_zero(p.with_k(p.k + 2), p.bp, p.nu) == pytest.approx(a, rel=1e-12)


def test_k_shift_ratio_is_exponent_phase(golden_confluent):
    p = golden_confluent
    assert cf.k_shift_ratio(p) == pytest.approx(cmath.exp(2j * math.pi * p.exponent()))
    assert abs(cf.k_shift_ratio(p)) == pytest.approx(math.exp(-2 * math.pi * p.exponent().imag))


def test_limit_parity_mismatch():
    odd = ConfluentParams.create(0.7, 0.3, -0.2, 0.4, 0.25, 0.35, k=1)
    even = odd.with_k(2)
    with pytest.raises(DomainError):
        cf.l_factor_log(odd, 1, 12.0)
    with pytest.raises(DomainError):
        cf.l_factor_log(even, -1, 12.0)
    with pytest.raises(ValueError):
        cf.l_factor_log(odd, 0, 12.0)


def test_confluent_fusion_params(golden_confluent):
    fp = cf.confluent_fusion_params(golden_confluent, 1, 20.0)
    assert fp.theta1 - fp.theta_inf == pytest.approx(golden_confluent.theta_star)
    assert fp.sigma_t == pytest.approx(10.0 - golden_confluent.nu)


@pytest.mark.parametrize("j", [1, -1])
def test_x_coefficient_tends_to_one(j):
    p = ConfluentParams.create(0.7, 0.3, -0.2, 0.4, 0.25, 0.35, k=2)
    gaps = [abs(cf.x_coefficient(p, j, lam) - 1) for lam in (50.0, 100.0, 200.0, 400.0)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    # first order in 1/Lambda
    assert gaps[-1] / gaps[-2] == pytest.approx(0.5, abs=0.1)


def test_x_coefficient_at_large_lambda():
    p = ConfluentParams.create(0.7, 0.3, -0.2, 0.4, 0.25, 0.35, k=2)
    assert abs(cf.x_coefficient(p, 1, 400.0) - 1) < 1e-2


class TestTailSlopes:
    def test_real_nu_keeps_horizontal_tails(self, golden_confluent):
        left, right, decay = cf.tail_slopes(golden_confluent)
        assert (left, right) == (0.0, 0.0)
        assert decay == pytest.approx(math.pi * golden_confluent.bp.Q)

    def test_shift_by_inverse_b_tilts_the_slow_tail(self, golden_confluent):
        p = golden_confluent.with_nu(golden_confluent.nu + 1j / golden_confluent.bp.b)
        left, right, decay = cf.tail_slopes(p)
        assert (left != 0) != (right != 0)
        assert decay >= cf.TAIL_DECAY * math.pi * p.bp.Q * (1 - 1e-12)

    def test_rates_follow_imaginary_nu(self, golden_confluent):
        p = golden_confluent
        kappa_left, kappa_right = cf.asymptotic_rates(p)
        slow = min(kappa_left.real, -kappa_right.real)
        assert slow == pytest.approx(math.pi * p.bp.Q)
        shifted = cf.asymptotic_rates(p.with_nu(p.nu + 0.2j))
        assert min(shifted[0].real, -shifted[1].real) == pytest.approx(math.pi * (p.bp.Q - 0.4))

    def test_no_slope_rescues_a_vanishing_drift(self):
        # Re(nu + theta_star/2 + theta_t) = 0 leaves no gradient to tilt along
        p = ConfluentParams.create(0.7, 0.3, -0.2, 0.4, 0.0 + 3.0j, 0.35, k=2)
        with pytest.raises(NoConvergence):
            cf.tail_slopes(p)


class TestDiscretePoints:
    def test_nu_limit(self, golden_confluent):
        p = golden_confluent
        assert cf.nu_limit(0, p) == pytest.approx(p.theta_t - 0.5j * p.bp.Q - p.theta_star / 2)
        assert cf.nu_limit(3, p) - cf.nu_limit(2, p) == pytest.approx(-1j * p.bp.b)
        with pytest.raises(ValueError):
            cf.nu_limit(-1, p)

    def test_sigma_s_limit(self, golden_confluent):
        p = golden_confluent
        assert cf.sigma_s_limit(0, p) == pytest.approx(0.5j * p.bp.Q + p.theta_t - p.theta0)
        assert cf.sigma_s_limit(1, p) - cf.sigma_s_limit(0, p) == pytest.approx(1j * p.bp.b)


@pytest.mark.parametrize("n", range(4))
def test_hahn_limit_is_the_polynomial(golden_confluent, n):
    p = golden_confluent
    limit = cf.hahn_limit(n, p)
    assert abs(limit - cf.hahn_polynomial(n, p)) < 1e-10 * max(1, abs(limit))
    assert abs(limit - cf.hahn_finite_sum(n, p)) < 1e-11 * max(1, abs(limit))


@pytest.mark.parametrize("n", range(4))
def test_jacobi_limit_is_the_polynomial(golden_confluent, n):
    p = golden_confluent
    limit = cf.jacobi_limit(n, p)
    assert abs(limit - cf.jacobi_polynomial(n, p)) < 1e-10 * max(1, abs(limit))
    assert abs(limit - cf.jacobi_finite_sum(n, p)) < 1e-11 * max(1, abs(limit))


def test_degree_zero_polynomials(golden_confluent):
    assert cf.hahn_polynomial(0, golden_confluent) == pytest.approx(1)
    assert cf.jacobi_polynomial(0, golden_confluent) == pytest.approx(1)


@pytest.mark.parametrize("family", cf.DISCRETIZED_FAMILIES)
@pytest.mark.parametrize("n", [0, 1, 2])
def test_discretized_coefficients(golden_confluent, family, n):
    assert cf.discretized_operator_check(family, n, golden_confluent) < 1e-11


@pytest.mark.parametrize("family", cf.DISCRETIZED_FAMILIES)
def test_discretized_values(golden_confluent, family):
    assert cf.discretized_operator_check(family, 2, golden_confluent, layer="value") < 1e-9


def test_discretized_unknown_inputs(golden_confluent):
    with pytest.raises(ValueError):
        cf.discretized_operator_check("wilson", 0, golden_confluent)
    with pytest.raises(ValueError):
        cf.discretized_operator_check("hahn_recurrence", 0, golden_confluent, layer="kernel")


def test_scalar_identities(golden_confluent):
    assert cf.hahn_h_identity(golden_confluent) < 1e-12
    for n in range(3):
        assert cf.jacobi_eigen_identity(n, golden_confluent) < 1e-12


def test_eigen_which_out_of_range(golden_confluent, qs):
    with pytest.raises(ValueError):
        cf.verify_ck_eigen(golden_confluent, 5, qs)


@pytest.mark.slow
@pytest.mark.parametrize("which", [1, 2, 3, 4])
@pytest.mark.parametrize("family", ["C", "ren", "hat"])
def test_eigen_equations(golden_confluent, qs, which, family):
    assert cf.verify_ck_eigen(golden_confluent, which, qs, family) < 1e-7


@pytest.mark.slow
def test_k_shift_on_the_kernel(golden_confluent, qs):
    p = golden_confluent
    base = cf.ck_kernel(p, qs).value
    shifted = cf.ck_kernel(p.with_k(p.k + 2), qs).value
    assert abs(shifted - cf.k_shift_ratio(p) * base) < 1e-8 * max(1, abs(shifted))


@pytest.mark.slow
@pytest.mark.parametrize("evaluate", [cf.ck_ren, cf.chat_ren])
def test_renormalized_invariance(golden_confluent, qs, evaluate):
    p = golden_confluent
    base = evaluate(p, qs).value
    assert abs(evaluate(p.with_k(p.k + 2), qs).value - base) < 1e-8 * max(1, abs(base))
    assert abs(evaluate(p.dual_b(), qs).value - base) < 1e-8 * max(1, abs(base))


@pytest.mark.slow
def test_golden_kernel_against_fixed_rule(golden_confluent, qs):
    adaptive = cf.ck_kernel(golden_confluent, qs)
    fixed = cf.ck_kernel(golden_confluent, qs, rule="fixed")
    assert abs(adaptive.value - fixed.value) < 1e-9 * max(1, abs(fixed.value))


@pytest.mark.slow
def test_confluent_limit_shrinks(golden_confluent, qs):
    eps = -1 if golden_confluent.parity.odd else 1
    gaps = cf.confluent_limit_check(golden_confluent, eps, (6.0, 12.0, 24.0), qs)
    assert gaps[-1] < gaps[0]


@pytest.mark.slow
@pytest.mark.parametrize("dual", [False, True])
def test_operator_convergence(qs, dual):
    p = ConfluentParams.create(0.7, 0.3, -0.2, 0.4, 0.25, 0.35, k=2)
    deviations = cf.operator_convergence_check(p, dual)
    assert deviations[-1].deviation < deviations[0].deviation
    assert [d.lam for d in deviations] == [6.0, 12.0, 24.0]
