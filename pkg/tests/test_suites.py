#!/usr/bin/env python3
"""Suite assembly, execution and report determinism"""

import dataclasses
import math

import pytest

from cvk.errors import SingularPoint
from cvk.verify import suites
from cvk.verify.config import build_config
from cvk.verify.suites import SUITES, Check, collect_checks, run_suite


@pytest.fixture
def small_config():
    return build_config({"run": {"points": 2, "n_max": 2}})


def test_every_suite_has_a_builder():
    assert set(suites.BUILDERS) == set(SUITES)


def test_unknown_suite(small_config):
    with pytest.raises(ValueError, match="unknown suite"):
        collect_checks(small_config, "wilson")


def test_check_names_are_deterministic_and_unique(small_config):
    first = [c.name for c in collect_checks(small_config)]
    second = [c.name for c in collect_checks(small_config)]
    assert first == second
    assert len(first) == len(set(first))


def test_every_check_has_a_known_tolerance(small_config):
    for check in collect_checks(small_config):
        assert check.anchor
        assert check.suite in SUITES
        assert small_config.tolerance(check.family) > 0


def test_limits_anchors_present():
    config = build_config({"run": {"n_max": 4}})
    anchors = {c.anchor for c in collect_checks(config, "limits")}
    for anchor in ("Under the parameter correspondence",
                   "reduces to the continuous dual q-Hahn polynomial",
                   "reduces to the big q-Jacobi polynomial"):
        assert anchor in anchors
    names = {c.name for c in collect_checks(config, "limits")}
    assert "limits/hahn_k2_n4" in names
    assert "limits/askey_wilson_n1" in names


def test_points_follow_the_seed(small_config):
    a = suites._points(small_config)
    b = suites._points(small_config)
    c = suites._points(dataclasses.replace(small_config, seed=small_config.seed + 1))
    assert a == b
    assert a != c
    for point in a:
        assert point["b"] in suites.B_CHOICES
        assert all(-0.8 <= t <= 0.8 for t in point["thetas"])
        assert all(0.1 <= s <= 0.8 for s in point["spectral"])


def test_raising_check_is_recorded(small_config):
    def boom():
        raise SingularPoint("x on the pole lattice")

    check = Check("special/boom", "anchor", "special", "special", boom)
    [result] = suites._execute(check, small_config)
    assert not result.passed
    assert math.isinf(result.residual)
    assert result.error.startswith("SingularPoint")


def test_non_finite_residual_fails(small_config):
    check = Check("special/nan", "anchor", "special", "special", lambda: [("", float("nan"))])
    [result] = suites._execute(check, small_config)
    assert not result.passed
    assert result.error == "non-finite residual"


def test_multi_residual_check_suffixes(small_config):
    check = Check("qseries/pair", "anchor", "qseries", "qseries", lambda: [("/a", 0.0), ("/b", 1.0)])
    results = suites._execute(check, small_config)
    assert [r.name for r in results] == ["qseries/pair/a", "qseries/pair/b"]
    assert [r.passed for r in results] == [True, False]


def test_qseries_suite_passes(small_config):
    report = run_suite(small_config, "qseries")
    assert report.checks
    assert report.failed == 0, [c.name for c in report.checks if not c.passed]
    assert report.validate().is_valid


def test_zero_tolerance_fails_everything(small_config):
    tampered = dataclasses.replace(small_config, tolerances={f: 0.0 for f in small_config.tolerances})
    report = run_suite(tampered, "qseries")
    assert report.summary["passed"] == 0
    assert report.exit_code() > 0


def test_report_is_reproducible(small_config):
    threaded = dataclasses.replace(small_config, threads=4)
    a = run_suite(small_config, "qseries").to_dict()
    b = run_suite(threaded, "qseries").to_dict()
    strip = lambda d: [(c["name"], c["residual"], c["passed"]) for c in d["checks"]]
    assert strip(a) == strip(b)
    assert a["config_digest"] == b["config_digest"]


@pytest.mark.slow
def test_qaskey_suite_passes():
    report = run_suite(build_config(), "qaskey")
    assert report.failed == 0, [c.name for c in report.checks if not c.passed]


def test_limit_checks_use_per_degree_tolerances():
    config = build_config({"run": {"n_max": 4}})
    families = {c.name: c.family for c in collect_checks(config, "limits")}
    for n in range(3):
        assert families[f"limits/askey_wilson_n{n}"] == f"fusion_limit_n{n}"
    assert "limits/askey_wilson_n3" not in families


def test_confluent_points_keep_a_drift(small_config):
    config = dataclasses.replace(small_config, points=40)
    for point in suites._points(config):
        p = suites._confluent_point(point, 2)
        drift = p.nu.real + p.theta_star / 2 + p.theta_t
        assert abs(drift) >= suites.DRIFT_MARGIN


def test_fusion_points_are_real_with_two_b_values():
    points = suites.fusion_points(3, 10)
    assert len(points) == 10
    assert {round(p.bp.b, 12) for p in points} <= set(suites.FUSION_B_CHOICES)
    assert all(p.sigma_s.imag == 0 and p.sigma_t.imag == 0 for p in points)


def test_identity_and_degree_checks_are_collected(small_config):
    names = {c.name for c in collect_checks(small_config)}
    for name in ("qseries/pochhammer[0]", "qseries/terminating_transformation[0]",
                 "qseries/two_sided_transform[0]", "qaskey/askey_wilson_degree[0]",
                 "qaskey/standard_symmetry[0]", "qaskey/jacobi_limit_rate[0]",
                 "confluent/x_coefficient_decay_j-1", "fusion/eigen_ren[2]"):
        assert name in names


def test_qaskey_suite_reaches_degree_eight(small_config):
    report = run_suite(small_config, "qaskey")
    names = {c.name for c in report.checks}
    assert "qaskey/askey_wilson[0]/recurrence_n8" in names
    assert report.failed == 0, [(c.name, c.residual) for c in report.checks if not c.passed]
