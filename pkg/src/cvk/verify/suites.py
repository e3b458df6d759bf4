"""
Verification suites. Each suite is a list of named checks returning
residuals; run_suite executes them on a thread pool and collects a report.
A check that raises is recorded as failed and never stops the run.
"""

from __future__ import annotations

import cmath
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from ..core.operators import eigen_residual
from ..core.qaskey import (
    AWParams,
    askey_wilson,
    aw_difference_op,
    aw_eigenvalue,
    aw_recurrence_op,
    hahn,
    hahn_difference_op,
    hahn_recurrence_op,
    jacobi,
    jacobi_difference_op,
    jacobi_eigenvalue,
    jacobi_recurrence_op,
    standard_normalization,
)
from ..core.qseries import phi, qpoch, sigma_hahn, sigma_jacobi
from ..core.special_functions import BParameter, sb_from_gb, sb_integral, sb_log
from ..errors import CvkError
from ..kernels import confluent as cf
from ..kernels import fusion as fu
from .config import SuiteConfig
from .report import CheckResult, VerificationReport

logger = logging.getLogger(__name__)

SUITES = ("special", "qseries", "qaskey", "fusion", "confluent", "limits")
B_CHOICES = (0.5 + math.sqrt(2) / 10, 0.7, 1.3)
THETA_RANGE = (-0.8, 0.8)
SPECTRAL_RANGE = (0.1, 0.8)

GOLDEN_FUSION = dict(b=0.7, theta0=0.3, theta_t=-0.2, theta1=0.5, theta_inf=0.1, sigma_s=0.4, sigma_t=0.6)
GOLDEN_CONFLUENT = dict(b=0.7, theta0=0.3, theta_t=-0.2, theta_star=0.4, nu=0.25, sigma_s=0.35)
XYZ_POINT = 0.3 + 0.1j
X_LAMBDAS = (50.0, 100.0, 200.0, 400.0)
DRIFT_MARGIN = 0.2
FUSION_B_CHOICES = (0.7, 1.3)
FUSION_THETA_RANGE = (-0.4, 0.4)
QASKEY_MAX_DEGREE = 8
JACOBI_LAMBDAS = (1e-2, 5e-3)
JACOBI_LIMIT_LAMBDA = 1e-4

Outcome = Sequence[Tuple[str, float]]


@dataclass(frozen=True)
class Check:
    """A named computation; ``run`` may report several residuals, suffixed to the name"""
    name: str
    anchor: str
    suite: str
    family: str
    run: Callable[[], Outcome]


def _single(fn: Callable[[], float]) -> Callable[[], Outcome]:
    return lambda: [("", float(fn()))]


def _rel(got: complex, want: complex) -> float:
    return abs(got - want) / max(1.0, abs(want))


def _ratio_growth(values: Sequence[float]) -> float:
    """Largest ratio of successive values; below 1 means strictly decreasing"""
    return max(b / a if a > 0 else math.inf for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# random points

def _points(config: SuiteConfig) -> List[Dict[str, float]]:
    rng = np.random.default_rng(config.seed)
    out = []
    for _ in range(config.points):
        out.append({
            "b": float(rng.choice(B_CHOICES)),
            "thetas": [float(v) for v in rng.uniform(*THETA_RANGE, size=4)],
            "spectral": [float(v) for v in rng.uniform(*SPECTRAL_RANGE, size=2)],
        })
    return out


def _confluent_point(point: Dict[str, float], k: int) -> cf.ConfluentParams:
    t = point["thetas"]
    nu = point["spectral"][0]
    # tail slope of the nu + i/b shift scales as 1/|Re(nu + theta*/2 + theta_t)|
    if abs(nu + t[2] / 2 + t[1]) < DRIFT_MARGIN:
        nu += 2 * DRIFT_MARGIN
    return cf.ConfluentParams.create(point["b"], t[0], t[1], t[2], nu, point["spectral"][1], k)


def _fusion_point(point: Dict[str, float]) -> fu.FusionParams:
    t = point["thetas"]
    return fu.FusionParams.create(point["b"], t[0], t[1], t[2], t[3], point["spectral"][0], point["spectral"][1])


def fusion_points(seed: int, count: int) -> List[fu.FusionParams]:
    """Real-parameter fusion points with b in FUSION_B_CHOICES"""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        b = float(rng.choice(FUSION_B_CHOICES))
        t = rng.uniform(*FUSION_THETA_RANGE, size=4)
        s = rng.uniform(*SPECTRAL_RANGE, size=2)
        out.append(fu.FusionParams.create(b, *(float(v) for v in t), float(s[0]), float(s[1])))
    return out


# ---------------------------------------------------------------------------
# suite builders

def special_checks(config: SuiteConfig) -> List[Check]:
    checks = []
    for i, point in enumerate(_points(config)):
        bp = BParameter(point["b"])
        z = complex(point["thetas"][0], 0.4 * point["thetas"][1] * bp.Q / 2)
        far = complex(point["thetas"][2], 1.3 * bp.Q)
        sb_at = lambda w, bp=bp: complex(np.exp(sb_log(w, bp)))
        checks += [
            Check(f"special/sb_unitarity[{i}]", "s_b(x) s_b(-x) = 1", "special", "special",
                  _single(lambda z=z, f=sb_at: abs(f(z) * f(-z) - 1))),
            Check(f"special/sb_shift[{i}]", "s_b(x + ib/2) = 2cosh(pi b x) s_b(x - ib/2)", "special", "special",
                  _single(lambda z=z, f=sb_at, bp=bp: _rel(f(z + 0.5j * bp.b) / f(z - 0.5j * bp.b),
                                                          2 * cmath.cosh(math.pi * bp.b * z)))),
            Check(f"special/sb_from_gb[{i}]", "s_b(x) = g_b(x)/g_b(-x)", "special", "special",
                  _single(lambda z=z, f=sb_at, bp=bp: _rel(sb_from_gb(z, bp), f(z)))),
            Check(f"special/sb_integral[{i}]", "integral representation of s_b", "special", "special",
                  _single(lambda z=z, f=sb_at, bp=bp: _rel(f(z), sb_integral(z, bp)))),
            Check(f"special/sb_step_order[{i}]", "continuation independent of the step order", "special", "special",
                  _single(lambda w=far, bp=bp: _rel(complex(np.exp(sb_log(w, bp, ("b", "binv")))),
                                                    complex(np.exp(sb_log(w, bp, ("binv", "b"))))))),
        ]
    return checks


def qseries_checks(config: SuiteConfig) -> List[Check]:
    checks = []
    for i, point in enumerate(_points(config)):
        bp = BParameter(point["b"])
        t = point["thetas"]
        q = bp.q
        a, c = cmath.exp(2 * t[0] + 0.3j), cmath.exp(t[1] - 0.7j)
        alpha, beta, gamma = (-cmath.exp(2 * math.pi * bp.b * v) for v in t[:3])
        z = cmath.exp(2 * math.pi * bp.b * point["spectral"][0])
        n = min(config.n_max, 4) or 1
        # off the unit circle so that no lower parameter meets a power of q
        lo, hi = (cmath.exp(0.4 * v + 1j * (1 + 2 * v)) * 0.7 for v in t[2:])
        up1, up2 = (cmath.exp(0.4 * v - 1j * (2 + v)) * 1.6 for v in t[:2])

        def vandermonde(a=a, c=c, q=q, n=n):
            return _rel(phi([q ** (-n), a], [c], q, q), qpoch(c / a, q, n) / qpoch(c, q, n) * a ** n)

        def pochhammer(a=a, c=c, q=q):
            out = []
            for m in range(11):
                reversal = qpoch(q ** (1 - m) / a, q, m) * (-a) ** m * q ** (m * (m - 1) // 2)
                inverse = qpoch(1 / c, q, m) * (-c) ** m * q ** (-(m * (m - 1) // 2))
                out += [(f"/reversal_m{m}", _rel(reversal, qpoch(a, q, m))),
                        (f"/inverse_base_m{m}", _rel(qpoch(c, 1 / q, m), inverse))]
            return out

        def transformation(q=q, b_=lo, c_=hi, d=up1, e=up2):
            out = []
            for m in range(QASKEY_MAX_DEGREE + 1):
                s = d * e / (b_ * c_)
                lhs = (qpoch(s, q, m) / qpoch(e, q, m) * (b_ * c_ / d) ** m
                       * phi([q ** (-m), d / b_, d / c_], [d, s], q, q))
                out.append((f"/n{m}", _rel(lhs, phi([q ** (-m), b_, c_], [d, e], q, q))))
            return out

        def two_sided(q=q, n=n, a=up1, b_=up2, c_=1.6 * up1 / abs(up1) * cmath.exp(0.5j), z=cmath.exp(1j * t[3])):
            lhs = (qpoch(c_ * b_, q, n) / qpoch(a * b_, q, n)
                   * phi([q ** (-n), c_ * z, c_ / z], [b_ * c_, a * c_], q, a * b_ * q ** n))
            return _rel(lhs, phi([q ** (-n), a / z, a * z], [a * b_, a * c_], q, b_ * c_ * q ** n))

        def hahn_even(q=q, n=n, alpha=alpha, beta=beta, gamma=gamma, z=z):
            return _rel(sigma_hahn(n, 2, alpha, beta, gamma, z, q), hahn(n, z, gamma, beta, alpha, q))

        def hahn_odd(q=q, n=n, alpha=alpha, beta=beta, gamma=gamma, z=z):
            series = phi([q ** (-n), gamma * z, gamma / z], [beta * gamma, alpha * gamma], q, alpha * beta * q ** n)
            return _rel(sigma_hahn(n, 1, alpha, beta, gamma, z, q), series)

        def jacobi_both(q=q, n=n, alpha=alpha, beta=beta, gamma=gamma, x=z):
            even = _rel(sigma_jacobi(n, 2, alpha, beta, gamma, x, q), jacobi(n, x, alpha, beta, gamma, q))
            odd = _rel(sigma_jacobi(n, 1, alpha, beta, gamma, x, q),
                       jacobi(n, 1 / x, 1 / alpha, 1 / beta, 1 / gamma, 1 / q))
            return [("/k2", even), ("/k1", odd)]

        checks += [
            Check(f"qseries/chu_vandermonde[{i}]", "terminating q-Chu-Vandermonde sum", "qseries", "qseries",
                  _single(vandermonde)),
            Check(f"qseries/pochhammer[{i}]", "Using the general identity", "qseries", "scalar_identity",
                  pochhammer),
            Check(f"qseries/terminating_transformation[{i}]", "in the general identity", "qseries", "qseries",
                  transformation),
            Check(f"qseries/two_sided_transform[{i}]", "the two sides are indeed equal", "qseries", "qseries",
                  _single(two_sided)),
            Check(f"qseries/sigma_hahn_k2[{i}]", "sum reduces to a 3phi2 of q-Hahn type", "qseries", "qseries",
                  _single(hahn_even)),
            Check(f"qseries/sigma_hahn_k1[{i}]", "sum reduces to a 3phi2 of q-Hahn type", "qseries", "qseries",
                  _single(hahn_odd)),
            Check(f"qseries/sigma_jacobi[{i}]", "sum reduces to the big q-Jacobi 3phi2", "qseries", "qseries",
                  jacobi_both),
        ]
    return checks


def qaskey_checks(config: SuiteConfig) -> List[Check]:
    checks = []
    degrees = range(1, QASKEY_MAX_DEGREE + 1)
    for i, point in enumerate(_points(config)):
        fp = _fusion_point(point)
        aw = fu.map_fusion_to_aw(fp)
        z = cmath.exp(2 * math.pi * fp.bp.b * fp.sigma_t)
        cp = _confluent_point(point, 2)
        ha, hb, hg, hq = cf.map_confluent_to_hahn(cp)
        ja, jb, jg, jx, jq = cf.map_confluent_to_jacobi(cp)

        def aw_checks(aw=aw, z=z):
            out = []
            for n in degrees:
                rec = eigen_residual(aw_recurrence_op(aw), lambda m: askey_wilson(m, z, aw), n, z + 1 / z)
                diff = eigen_residual(aw_difference_op(aw), lambda w: askey_wilson(n, w, aw), z,
                                      aw_eigenvalue(n, aw))
                out += [(f"/recurrence_n{n}", rec), (f"/difference_n{n}", diff)]
            return out

        def hahn_checks(a=ha, b=hb, c=hg, q=hq, z=z):
            out = []
            for n in degrees:
                delta = _rel(hahn(n, z, a, b, c, q), askey_wilson(n, z, AWParams(a, b, c, 0j, q)))
                rec = eigen_residual(hahn_recurrence_op(a, b, c, q), lambda m: hahn(m, z, a, b, c, q), n, z + 1 / z)
                diff = eigen_residual(hahn_difference_op(a, b, c, q), lambda w: hahn(n, w, a, b, c, q), z,
                                      q ** (-n) - 1)
                out += [(f"/delta_zero_n{n}", delta), (f"/recurrence_n{n}", rec), (f"/difference_n{n}", diff)]
            return out

        def jacobi_checks(a=ja, b=jb, c=jg, x=jx, q=jq):
            out = []
            for n in degrees:
                rec = eigen_residual(jacobi_recurrence_op(a, b, c, q), lambda m: jacobi(m, x, a, b, c, q), n, x)
                diff = eigen_residual(jacobi_difference_op(a, b, c, q), lambda w: jacobi(n, w, a, b, c, q), x,
                                      jacobi_eigenvalue(n, x, a, b, q))
                out += [(f"/recurrence_n{n}", rec), (f"/difference_n{n}", diff)]
            return out

        def polynomial_fit(aw=aw, n=max(1, min(config.n_max, 6))):
            phases = np.linspace(0.2, 2.9, n + 2)
            y = 2 * np.cos(phases)
            values = np.array([askey_wilson(n, cmath.exp(1j * t), aw) for t in phases])
            basis = np.vander(y, n + 1).astype(complex)
            coef, *_ = np.linalg.lstsq(basis, values, rcond=None)
            return float(np.abs(basis @ coef - values).max() / max(1.0, np.abs(values).max()))

        def symmetry(aw=aw, x=0.5 * (z + 1 / z).real):
            out = []
            for n in range(1, min(QASKEY_MAX_DEGREE, 6) + 1):
                base = standard_normalization(n, x, aw)
                for label, other in (("alpha<->beta", AWParams(aw.beta, aw.alpha, aw.gamma, aw.delta, aw.q)),
                                     ("alpha<->delta", AWParams(aw.delta, aw.beta, aw.gamma, aw.alpha, aw.q))):
                    out.append((f"/{label}_n{n}", _rel(standard_normalization(n, x, other), base)))
            return out

        def jacobi_from_askey_wilson(q=fp.bp.q, t=point["thetas"], n=max(1, min(config.n_max, 3))):
            a, b = 0.6 * cmath.exp(1j * (1 + t[0])), 1.3 * cmath.exp(1j * (2 + t[1]))
            c = 0.8 * cmath.exp(1j * (t[2] - 1))
            x = 0.8 * cmath.exp(1j * t[3])
            want = jacobi(n, x, a, b, c, q)

            def gap(lam):
                aw_lam = AWParams(lam, a * q / lam, c * q / lam, lam * b / c, q)
                return abs(askey_wilson(n, x / lam, aw_lam) - want) / max(1.0, abs(want))

            coarse, fine = (gap(lam) for lam in JACOBI_LAMBDAS)
            # gap is even in lambda: halving lambda quarters it
            return gap(JACOBI_LIMIT_LAMBDA), abs(coarse / fine / 4 - 1)

        checks += [
            Check(f"qaskey/askey_wilson[{i}]", "three-term recurrence and q-difference equation",
                  "qaskey", "qaskey", aw_checks),
            Check(f"qaskey/hahn[{i}]", "by setting delta = 0", "qaskey", "qaskey", hahn_checks),
            Check(f"qaskey/jacobi[{i}]", "big q-Jacobi recurrence and difference equation",
                  "qaskey", "qaskey", jacobi_checks),
            Check(f"qaskey/askey_wilson_degree[{i}]", "the most general polynomials of the q-Askey scheme",
                  "qaskey", "polynomial_fit", _single(polynomial_fit)),
            Check(f"qaskey/standard_symmetry[{i}]", "symmetric in its four parameters", "qaskey", "qaskey",
                  symmetry),
            Check(f"qaskey/jacobi_limit[{i}]", "in a more subtle way", "qaskey", "jacobi_limit",
                  _single(lambda f=jacobi_from_askey_wilson: f()[0])),
            Check(f"qaskey/jacobi_limit_rate[{i}]", "in a more subtle way", "qaskey", "convergence",
                  _single(lambda f=jacobi_from_askey_wilson: f()[1])),
        ]
    return checks


def fusion_checks(config: SuiteConfig) -> List[Check]:
    qs = config.quadrature
    golden = fu.FusionParams.create(**GOLDEN_FUSION)
    checks = []
    for i, p in enumerate([golden] + fusion_points(config.seed, config.points)):
        for family in ("F", "M", "ren"):
            def run(p=p, family=family):
                return [(f"/{name}", r) for name, r in
                        fu.difference_equations(p, qs, family, clearance=config.clearance)]
            checks.append(Check(f"fusion/eigen_{family}[{i}]", "satisfies the following difference equations",
                                "fusion", "fusion_eigen", run))
    return checks


def confluent_checks(config: SuiteConfig) -> List[Check]:
    qs, kw = config.quadrature, {"clearance": config.clearance}
    golden = cf.ConfluentParams.create(**GOLDEN_CONFLUENT)
    checks = []
    points = [None] + _points(config)[1:]
    for k in config.k_list:
        for i, point in enumerate(points):
            p = golden.with_k(k) if point is None else _confluent_point(point, k)
            for which in (1, 2, 3, 4):
                checks.append(Check(
                    f"confluent/eigen_k{k}_{which}[{i}]", "satisfies the following pair of difference equations",
                    "confluent", "confluent_eigen",
                    _single(lambda p=p, which=which: cf.verify_ck_eigen(p, which, qs, **kw))))
        p = golden.with_k(k)
        checks.append(Check(f"confluent/xyz_k{k}", "possess the following properties", "confluent", "xyz",
                            lambda p=p: [(f"/{name}", r) for name, r in cf.xyz_identities(p, XYZ_POINT).items()]))
        for family in ("ren", "hat"):
            for variable in ("nu", "sigma_s"):
                checks.append(Check(
                    f"confluent/conjugation_{family}_{variable}_k{k}", "Define the renormalized difference operators",
                    "confluent", "conjugation",
                    lambda p=p, fam=family, v=variable: [(f"/{name}", r)
                                                       for name, r in cf.conjugation_gap(p, fam, v).items()]))
        checks.append(Check(
            f"confluent/zero_parity_k{k}", "depends on k only through (-1)^k", "confluent", "coefficient",
            _single(lambda p=p: _rel(cf.hc_zero(p, p.bp, p.nu), cf.hc_zero(p.with_k(p.k + 2), p.bp, p.nu)))))
        checks.append(Check(
            f"confluent/k_shift_ratio_k{k}", "complex powers on the universal cover", "confluent", "invariance",
            _single(lambda p=p: _rel(cf.ck_kernel(p.with_k(p.k + 2), qs, **kw).value,
                                     cf.k_shift_ratio(p) * cf.ck_kernel(p, qs, **kw).value))))
        for name, evaluate in (("ren", cf.ck_ren), ("hat", cf.chat_ren)):
            def invariance(p=p, evaluate=evaluate):
                base = evaluate(p, qs, **kw).value
                return [("/k+2", _rel(evaluate(p.with_k(p.k + 2), qs, **kw).value, base)),
                        ("/b<->1/b", _rel(evaluate(p.dual_b(), qs, **kw).value, base))]
            checks.append(Check(f"confluent/invariance_{name}_k{k}", "invariant under k -> k+2 and b -> 1/b",
                                "confluent", "invariance", invariance))

    lambdas = config.lambda_list
    for eps, k in ((1, 2), (-1, 1)):
        p = golden.with_k(k)
        checks.append(Check(
            f"confluent/limit_eps{eps:+d}", "L_j(eps Lambda) M tends to C_k", "confluent", "monotone",
            _single(lambda p=p, eps=eps: _ratio_growth(cf.confluent_limit_check(p, eps, lambdas, qs, **kw)))))
        for dual in (False, True):
            label = "dual" if dual else "nu"
            checks.append(Check(
                f"confluent/operator_convergence_{label}_eps{eps:+d}", "converge to the confluent operators",
                "confluent", "monotone",
                _single(lambda p=p, eps=eps, dual=dual: _ratio_growth(
                    [d.deviation for d in cf.operator_convergence_check(p, dual, lambdas, eps)]))))
    p = golden.with_k(2)
    for j in (1, -1):
        checks.append(Check(
            f"confluent/x_coefficient_decay_j{j:+d}", "X_j tends to one", "confluent", "monotone",
            _single(lambda p=p, j=j: _ratio_growth([abs(cf.x_coefficient(p, j, lam) - 1) for lam in X_LAMBDAS]))))
    checks.append(Check(
        "confluent/x_coefficient_limit", "X_{+1} tends to one", "confluent", "convergence",
        _single(lambda p=p: abs(cf.x_coefficient(p, 1, X_LAMBDAS[-1]) - 1))))
    return checks


def limits_checks(config: SuiteConfig) -> List[Check]:
    qs = config.quadrature
    fp = fu.FusionParams.create(**GOLDEN_FUSION)
    golden = cf.ConfluentParams.create(**GOLDEN_CONFLUENT)
    checks = []
    for n in range(min(config.n_max, 2) + 1):
        checks.append(Check(
            f"limits/askey_wilson_n{n}", "Under the parameter correspondence", "limits", f"fusion_limit_n{n}",
            _single(lambda n=n: _rel(fu.aw_limit(n, fp, qs, clearance=config.clearance).value,
                                     fu.aw_polynomial(n, fp)))))
    for n in range(config.n_max + 1):
        checks.append(Check(
            f"limits/askey_wilson_recurrence_n{n}", "Under the parameter correspondence", "limits", "coefficient",
            _single(lambda n=n: fu.recurrence_coefficient_gap(n, fp))))
    checks.append(Check("limits/askey_wilson_difference", "Under the parameter correspondence", "limits",
                        "coefficient", _single(lambda: fu.difference_coefficient_gap(fp))))

    for k in (1, 2):
        p = golden.with_k(k)
        for n in range(config.n_max + 1):
            checks += [
                Check(f"limits/hahn_k{k}_n{n}", "reduces to the continuous dual q-Hahn polynomial", "limits",
                      "polynomial_limit", _single(lambda p=p, n=n: _rel(cf.hahn_limit(n, p), cf.hahn_polynomial(n, p)))),
                Check(f"limits/hahn_sum_k{k}_n{n}", "in terms of q-Pochhammer symbols", "limits", "finite_sum",
                      _single(lambda p=p, n=n: _rel(cf.hahn_finite_sum(n, p), cf.hahn_limit(n, p)))),
                Check(f"limits/jacobi_k{k}_n{n}", "reduces to the big q-Jacobi polynomial", "limits",
                      "polynomial_limit",
                      _single(lambda p=p, n=n: _rel(cf.jacobi_limit(n, p), cf.jacobi_polynomial(n, p)))),
                Check(f"limits/jacobi_sum_k{k}_n{n}", "in terms of q-Pochhammer symbols", "limits", "finite_sum",
                      _single(lambda p=p, n=n: _rel(cf.jacobi_finite_sum(n, p), cf.jacobi_limit(n, p)))),
            ]
        n = min(config.n_max, 2)
        for family in cf.DISCRETIZED_FAMILIES:
            anchor = "reduce to the three-term recurrence relation"
            checks += [
                Check(f"limits/{family}_coefficients_k{k}", anchor, "limits", "coefficient",
                      _single(lambda p=p, f=family, n=n: cf.discretized_operator_check(f, n, p, "coefficient"))),
                Check(f"limits/{family}_values_k{k}", anchor, "limits", "discretized",
                      _single(lambda p=p, f=family, n=n: cf.discretized_operator_check(f, n, p, "value"))),
            ]
        checks += [
            Check(f"limits/hahn_h_identity_k{k}", "V_k matches the q-Hahn coefficient h", "limits", "scalar_identity",
                  _single(lambda p=p: cf.hahn_h_identity(p))),
            Check(f"limits/jacobi_eigen_identity_k{k}", "shifted eigenvalue matches the q-Jacobi eigenvalue",
                  "limits", "scalar_identity", _single(lambda p=p, n=n: cf.jacobi_eigen_identity(n, p))),
        ]
    return checks


BUILDERS: Dict[str, Callable[[SuiteConfig], List[Check]]] = {
    "special": special_checks,
    "qseries": qseries_checks,
    "qaskey": qaskey_checks,
    "fusion": fusion_checks,
    "confluent": confluent_checks,
    "limits": limits_checks,
}


def collect_checks(config: SuiteConfig, which: str = "all") -> List[Check]:
    if which == "all":
        names = SUITES
    elif which in BUILDERS:
        names = (which,)
    else:
        raise ValueError(f"unknown suite {which!r}, expected one of {', '.join(SUITES + ('all',))}")
    checks = []
    for name in names:
        checks.extend(BUILDERS[name](config))
    return checks


def _execute(check: Check, config: SuiteConfig) -> List[CheckResult]:
    tolerance = config.tolerance(check.family)
    start = time.perf_counter()
    try:
        outcome = list(check.run())
        error = None
    except (CvkError, ArithmeticError, ValueError) as e:
        outcome, error = [("", math.inf)], f"{type(e).__name__}: {e}"
    elapsed = int((time.perf_counter() - start) * 1000)
    results = []
    for suffix, residual in outcome:
        residual = float(residual) if math.isfinite(residual) else math.inf
        result = CheckResult(check.name + suffix, check.anchor, check.suite, residual, tolerance,
                             runtime_ms=elapsed, error=error if error else (None if math.isfinite(residual)
                                                                            else "non-finite residual"))
        if result.passed:
            logger.info("%s passed (%.3e <= %.1e)", result.name, residual, tolerance)
        else:
            logger.warning("%s FAILED: residual %.3e, tolerance %.1e%s", result.name, residual, tolerance,
                           f" ({result.error})" if result.error else "")
        results.append(result)
    return results


def run_suite(config: SuiteConfig, which: str = "all") -> VerificationReport:
    """Run the named suite (or all of them); check order in the report is deterministic"""
    checks = collect_checks(config, which)
    logger.info("running %d checks of suite '%s' on %d thread(s)", len(checks), which, config.threads)
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        grouped = list(pool.map(lambda c: _execute(c, config), checks))
    report = VerificationReport(config_digest=config.digest())
    for results in grouped:
        report.checks.extend(results)
    return report
