#!/usr/bin/env python3
"""Fusion kernel, renormalization and the Askey-Wilson limit"""

import cmath

import numpy as np
import pytest

from cvk.kernels.fusion import (
    LIMIT_EPSILONS,
    FusionParams,
    ResidueExtraction,
    aw_closed_form,
    aw_limit,
    aw_polynomial,
    combine_limit,
    difference_coefficient_gap,
    difference_equations,
    fren,
    fusion_kernel,
    fusion_prefactor_log,
    limit_offsets,
    pinch_count,
    recurrence_coefficient_gap,
    renormalization_log,
    renormalized_prefactor,
    sigma_s_limit,
    with_crossings,
)
from cvk.errors import AssumptionViolated, DomainError
from cvk.verify.suites import fusion_points


class TestFusionParams:
    def test_rejects_complex_theta(self):
        with pytest.raises(AssumptionViolated):
            FusionParams.create(0.7, 0.3 + 0.1j, -0.2, 0.5, 0.1, 0.4, 0.6)

    def test_exchange_is_an_involution(self, golden_fusion):
        assert golden_fusion.exchanged().exchanged() == golden_fusion
        assert golden_fusion.exchanged().sigma_s == golden_fusion.sigma_t

    def test_aw_assumption(self, golden_fusion):
        golden_fusion.check_aw_assumption()
        with pytest.raises(AssumptionViolated, match="sigma_t"):
            golden_fusion.with_sigma_t(0).check_aw_assumption()


def test_sigma_s_limit_points(golden_fusion):
    p = golden_fusion
    assert sigma_s_limit(0, p) == pytest.approx(0.5j * p.bp.Q + p.theta0 + p.theta_t)
    assert sigma_s_limit(2, p) - sigma_s_limit(1, p) == pytest.approx(1j * p.bp.b)
    with pytest.raises(ValueError):
        sigma_s_limit(-1, p)


def test_closed_form_limit_is_one(golden_fusion):
    assert abs(aw_closed_form(golden_fusion) - 1) < 1e-10


def test_reduced_prefactor_matches_the_product(golden_fusion):
    p = golden_fusion
    direct = cmath.exp(renormalization_log(p) + fusion_prefactor_log(p))
    assert abs(renormalized_prefactor(p) - direct) < 1e-9 * abs(direct)


@pytest.mark.parametrize("n", range(5))
def test_recurrence_coefficients_at_discrete_points(golden_fusion, n):
    assert recurrence_coefficient_gap(n, golden_fusion) < 1e-11


def test_difference_coefficients(golden_fusion):
    assert difference_coefficient_gap(golden_fusion) < 1e-11


def test_degree_zero_polynomial(golden_fusion):
    assert aw_polynomial(0, golden_fusion) == 1


def test_pinch_count_grows_with_n(golden_fusion):
    bp = golden_fusion.bp
    assert pinch_count(bp, 0, 0.05) >= 1
    assert pinch_count(bp, 3, 0.05) >= pinch_count(bp, 1, 0.05)


def test_limit_degree_above_cap(golden_fusion, qs):
    with pytest.raises(DomainError):
        aw_limit(4, golden_fusion, qs, n_max=3)


@pytest.mark.slow
def test_kernel_value_and_oracle(golden_fusion, qs):
    adaptive = fusion_kernel(golden_fusion, qs)
    fixed = fusion_kernel(golden_fusion, qs, rule="fixed")
    assert np.isfinite(adaptive.value)
    assert abs(adaptive.value - fixed.value) < 1e-9 * max(1, abs(fixed.value))


@pytest.mark.slow
def test_b_duality(golden_fusion, qs):
    a = fren(golden_fusion, qs).value
    b = fren(golden_fusion.dual_b(), qs).value
    assert abs(a - b) < 1e-8 * max(1, abs(a))


@pytest.mark.slow
@pytest.mark.parametrize("family", ["F", "M", "ren"])
def test_difference_equations(golden_fusion, qs, family):
    for name, residual in difference_equations(golden_fusion, qs, family):
        assert residual < 1e-7, name


@pytest.mark.slow
def test_askey_wilson_limit_degree_zero(golden_fusion, qs):
    limit = aw_limit(0, golden_fusion, qs)
    assert abs(limit.value - 1) < 1e-6
    assert limit.closed_form == pytest.approx(1, abs=1e-10)


def test_crossings_merge_with_requested_extractions():
    requested = (ResidueExtraction("-theta_inf-sigma_s", 2),)
    merged = with_crossings(requested, {"-theta_inf-sigma_s": 1, "-theta1-iQ/2": 3})
    assert dict((ex.label, ex.count) for ex in merged) == {"-theta_inf-sigma_s": 2, "-theta1-iQ/2": 3}
    assert with_crossings((), {}) == ()


def test_limit_offsets_and_combination():
    offsets = limit_offsets("circle", LIMIT_EPSILONS, 1e-2, 6)
    assert len(offsets) == 6
    assert combine_limit("circle", [2.0 + 5 * e for e in offsets], offsets) == pytest.approx(2.0)
    real = limit_offsets("richardson", (1e-2, 5e-3, 2.5e-3), 1e-2, 6)
    assert combine_limit("richardson", [2.0 + 5 * e for e in real], real) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        limit_offsets("secant", LIMIT_EPSILONS, 1e-2, 6)


@pytest.mark.slow
@pytest.mark.parametrize("shift", [1j * 0.7, 1j / 0.7, -1j * 0.7])
def test_evaluation_with_anchors_sharing_a_real_part(golden_fusion, qs, shift):
    # -theta_inf - sigma_s and -theta1 - iQ/2 both sit at Re x = -0.5
    value = fusion_kernel(golden_fusion.with_sigma_s(golden_fusion.sigma_s + shift), qs).value
    assert np.isfinite(value)


@pytest.mark.slow
def test_askey_wilson_limit_remainder_vanishes(golden_fusion, qs):
    limit = aw_limit(0, golden_fusion, qs)
    assert abs(limit.remainder) < 1e-6
    assert limit.residue_terms >= 1


@pytest.mark.slow
@pytest.mark.parametrize("n, tolerance", [(1, 1e-5), (2, 1e-4)])
def test_askey_wilson_limit_higher_degrees(golden_fusion, qs, n, tolerance):
    limit = aw_limit(n, golden_fusion, qs)
    want = aw_polynomial(n, golden_fusion)
    assert abs(limit.value - want) < tolerance * max(1, abs(want))


@pytest.mark.slow
@pytest.mark.parametrize("point", fusion_points(2024, 10), ids=lambda p: f"b={p.bp.b}")
def test_difference_equations_at_random_points(qs, point):
    for family in ("F", "ren"):
        for name, residual in difference_equations(point, qs, family):
            assert residual < 1e-7, name
