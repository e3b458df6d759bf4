"""
Confluent fusion kernels C_k, the renormalized C_k^ren and Chat_k^ren, the
six difference operators they diagonalize, the confluent limit out of M and
the degenerations to continuous dual q-Hahn and big q-Jacobi polynomials.

Every k dependence goes through a Parity record. The integrand of all three
kernels is the same; only the prefactor changes.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import loggamma

from ..core.numerics import (
    Orientation,
    PoleSequence,
    QuadratureSettings,
    crossing_counts,
    ensure_finite,
    fixed_rule_integral,
    integrate_along,
    route_contour,
)
from ..core.operators import ShiftKind, ThreeTermOperator, eigen_residual
from ..core.qaskey import (
    hahn,
    hahn_difference_op,
    hahn_h,
    hahn_recurrence_op,
    jacobi,
    jacobi_difference_op,
    jacobi_eigenvalue,
    jacobi_recurrence_op,
)
from ..core.qseries import csum, qpoch, qpoch_multi
from ..core.special_functions import BParameter, gb_log, sb_log, sb_pole, sb_residue, sb_shift
from ..errors import AssumptionViolated, DomainError, NoConvergence, NonFiniteSample, SingularPoint
from .fusion import (
    ASSUMPTION_TOL,
    DEFAULT_CLEARANCE,
    LIMIT_EPSILONS,
    LIMIT_POINTS,
    LIMIT_RADIUS,
    ORACLE_PANELS,
    FusionOperator,
    FusionParams,
    KernelValue,
    LimitValue,
    ResidueExtraction,
    build_fusion_operator,
    combine_limit,
    conformal_dimension,
    limit_offsets,
    m_kernel,
    pinch_count,
    with_crossings,
)
from .parity import Parity

logger = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (6.0, 12.0, 24.0)
TAIL_DECAY = 0.5                  # slowest tail decays at least this fraction of pi Q per unit Re x
MAX_TAIL_SLOPE = 8.0

__all__ = [
    "ConfluentParams", "BranchedPower", "ConfluentOperator", "ConfluentFamily", "OperatorDeviation",
    "conformal_weight", "ck_pole_data", "ck_integrand_log", "ck_prefactor_log", "ck_kernel",
    "k_shift_ratio", "n1_log", "n2_log", "n3_log", "n4_log", "ren_prefactor_log", "hat_prefactor_log",
    "ck_ren", "chat_ren", "build_confluent_operator", "confluent_eigenvalue", "verify_ck_eigen",
    "conjugation_gap", "xyz_identities", "confluent_limit_check", "operator_convergence_check",
    "nu_limit", "sigma_s_limit", "map_confluent_to_hahn", "map_confluent_to_jacobi",
    "hahn_limit", "hahn_finite_sum", "hahn_polynomial", "jacobi_limit", "jacobi_finite_sum",
    "jacobi_polynomial", "hahn_near_limit", "jacobi_near_limit", "discretized_operator_check",
    "hahn_h_identity", "jacobi_eigen_identity", "l_factor_log", "confluent_fusion_params",
    "conjugated_m_operator", "x_coefficient", "j_coefficient", "chi_coefficient",
    "asymptotic_rates", "tail_slopes",
]

conformal_weight = conformal_dimension


@dataclass(frozen=True)
class BranchedPower:
    """base^exponent on the universal cover, with branch_offset added to Arg(base)"""
    base: complex
    exponent: complex
    branch_offset: float = 0.0

    def __post_init__(self):
        if complex(self.base) == 0:
            raise DomainError("branched power of zero")

    def log(self) -> complex:
        base = complex(self.base)
        return complex(self.exponent) * complex(math.log(abs(base)), cmath.phase(base) + self.branch_offset)

    @property
    def value(self) -> complex:
        return ensure_finite(cmath.exp(self.log()), "branched power")


@dataclass(frozen=True)
class ConfluentParams:
    """Arguments of C_k[theta0 theta_t; theta_star; nu, sigma_s]"""
    bp: BParameter
    theta0: float
    theta_t: float
    theta_star: float
    nu: complex
    sigma_s: complex
    k: int = 1

    def __post_init__(self):
        for name in ("theta0", "theta_t", "theta_star"):
            value = complex(getattr(self, name))
            if abs(value.imag) > 0:
                raise AssumptionViolated(f"{name} must be real, got {value}")
            object.__setattr__(self, name, float(value.real))
        object.__setattr__(self, "nu", ensure_finite(self.nu, "nu"))
        object.__setattr__(self, "sigma_s", ensure_finite(self.sigma_s, "sigma_s"))
        object.__setattr__(self, "k", Parity(self.k).k)

    @classmethod
    def create(cls, b: float, theta0: float, theta_t: float, theta_star: float,
               nu: complex, sigma_s: complex, k: int = 1) -> "ConfluentParams":
        return cls(BParameter(b), theta0, theta_t, theta_star, nu, sigma_s, k)

    @property
    def parity(self) -> Parity:
        return Parity(self.k)

    def with_nu(self, value: complex) -> "ConfluentParams":
        return replace(self, nu=value)

    def with_sigma_s(self, value: complex) -> "ConfluentParams":
        return replace(self, sigma_s=value)

    def with_k(self, k: int) -> "ConfluentParams":
        return replace(self, k=k)

    def dual_b(self) -> "ConfluentParams":
        return replace(self, bp=BParameter(1.0 / self.bp.b))

    def exponent(self, nu: Optional[complex] = None, sigma_s: Optional[complex] = None) -> complex:
        """Delta(theta0) + Delta(theta_t) - Delta(sigma_s) + theta_star^2/2 - 2 nu^2"""
        nu = self.nu if nu is None else nu
        ss = self.sigma_s if sigma_s is None else sigma_s
        bp = self.bp
        return (conformal_weight(self.theta0, bp) + conformal_weight(self.theta_t, bp)
                - conformal_weight(ss, bp) + self.theta_star ** 2 / 2 - 2 * nu ** 2)

    def check_discrete_assumption(self, sigma_s: Optional[complex] = None) -> None:
        """Non-degeneracy needed by the q-Hahn and q-Jacobi limits; raises AssumptionViolated"""
        if self.bp.root_of_unity:
            raise AssumptionViolated(f"b^2 = {self.bp.b ** 2:.12g} makes q a low-order root of unity")
        ss = self.sigma_s if sigma_s is None else complex(sigma_s)
        t0, tt, ts = self.theta0, self.theta_t, self.theta_star
        checks = [("theta0", t0), ("theta_t", tt), ("sigma_s", ss)]
        for e in (1, -1):
            checks.append((f"theta_star{e:+d}sigma_s", ts + e * ss))
            checks.append((f"theta0{e:+d}theta_t-theta_star", e * t0 + tt - ts))
            for e2 in (1, -1):
                checks.append((f"theta0{e:+d}theta_t{e2:+d}sigma_s", t0 + e * tt + e2 * ss))
        for name, value in checks:
            if abs(value) < ASSUMPTION_TOL:
                raise AssumptionViolated(f"{name} vanishes ({value})")


# ---------------------------------------------------------------------------
# pole data, integrand, prefactors

# labels of the three numerator s_b; their poles build the downward sequences
_NUMER_LABELS = ("x+theta_star/2-theta_t+nu", "x+theta0+nu-theta_star/2", "x-theta0+nu-theta_star/2")
_DENOM_LABELS = ("x+iQ/2", "x+iQ/2+nu-theta_star/2-theta_t+sigma_s",
                 "x+iQ/2+nu-theta_star/2-theta_t-sigma_s")


def _shifts(p: ConfluentParams) -> Tuple[List[complex], List[complex]]:
    half = 0.5j * p.bp.Q
    h = p.theta_star / 2
    numer = [h - p.theta_t + p.nu, p.theta0 + p.nu - h, -p.theta0 + p.nu - h]
    denom = [half, half + p.nu - h - p.theta_t + p.sigma_s, half + p.nu - h - p.theta_t - p.sigma_s]
    return [complex(v) for v in numer], [complex(v) for v in denom]


def _phase_rate(p: ConfluentParams) -> complex:
    """Coefficient of x in the exponential factor of I^{(k)}"""
    return -p.parity.sign * 1j * math.pi * (0.5j * p.bp.Q + p.theta_star / 2 + p.theta_t + p.nu)


def ck_pole_data(p: ConfluentParams) -> Tuple[List[PoleSequence], List[PoleSequence]]:
    """Three upward and three downward pole sequences of I^{(k)}"""
    b, binv, half = p.bp.b, 1.0 / p.bp.b, 0.5j * p.bp.Q
    numer, denom = _shifts(p)
    upward = [PoleSequence(half - c, Orientation.UPWARD, b, binv, label)
              for c, label in zip(denom, _DENOM_LABELS)]
    downward = [PoleSequence(-a - half, Orientation.DOWNWARD, b, binv, label)
                for a, label in zip(numer, _NUMER_LABELS)]
    return upward, downward


def ck_integrand_log(x, p: ConfluentParams) -> np.ndarray:
    """ln I^{(k)}(x); vectorized in x"""
    numer, denom = _shifts(p)
    x = np.asarray(x, dtype=complex)
    args = x[..., None] + np.array(numer + denom)
    weights = np.array([1.0] * 3 + [-1.0] * 3)
    return _phase_rate(p) * x + np.sum(sb_log(args, p.bp) * weights, axis=-1)


def asymptotic_rates(p: ConfluentParams) -> Tuple[complex, complex]:
    """
    (kappa_-, kappa_+) with ln I^{(k)}(x) = kappa_{+-} x + O(1) as Re x -> +-inf.
    The quadratic parts of the six s_b cancel; the linear part moves with Im nu.
    """
    numer, denom = _shifts(p)
    drift = 1j * math.pi * (sum(numer) - sum(denom))
    rate = _phase_rate(p)
    return rate + drift, rate - drift


def _tilt(base: float, gradient: float, target: float) -> Tuple[float, float]:
    if base >= target or abs(gradient) < 1e-12:
        return 0.0, base
    slope = max(-MAX_TAIL_SLOPE, min(MAX_TAIL_SLOPE, (target - base) / gradient))
    return slope, base + slope * gradient


def tail_slopes(p: ConfluentParams) -> Tuple[float, float, float]:
    """
    (left slope, right slope, slower decay per unit Re x) of contour tails
    along which I^{(k)} decays at TAIL_DECAY * pi Q or better.

    For real nu both tails are horizontal. Once Im nu passes Q/4 the slow
    tail is tilted, which continues C_k past Im nu = Q/2 where the horizontal
    integral diverges. Raises NoConvergence when no slope up to
    MAX_TAIL_SLOPE gives decay.
    """
    kappa_left, kappa_right = asymptotic_rates(p)
    target = TAIL_DECAY * math.pi * p.bp.Q
    # along x0 + u(+-1 + i s) the decay per unit u is base + s * gradient
    left, left_decay = _tilt(kappa_left.real, kappa_left.imag, target)
    right, right_decay = _tilt(-kappa_right.real, kappa_right.imag, target)
    decay = min(left_decay, right_decay)
    if not decay > 0:
        raise NoConvergence(f"I^({p.k}) grows along every tail with slope <= {MAX_TAIL_SLOPE} at nu = {p.nu}")
    return left, right, decay


def _gb_sum(values: Sequence[complex], bp: BParameter) -> complex:
    return complex(np.sum(gb_log(np.array(values, dtype=complex), bp)))


def _sb_sum(values: Sequence[complex], bp: BParameter) -> complex:
    return complex(np.sum(sb_log(np.array(values, dtype=complex), bp)))


def ck_prefactor_log(p: ConfluentParams) -> complex:
    """ln P^{(k)}"""
    t0, tt, ts, nu, ss = p.theta0, p.theta_t, p.theta_star, p.nu, p.sigma_s
    half = 0.5j * p.bp.Q
    power = BranchedPower(p.bp.b, p.exponent(), p.parity.branch).log()
    numer, denom = [], []
    for e in (1, -1):
        numer += [e * ss - ts, e * ss - t0 - tt, e * ss + t0 - tt]
        denom += [-half + 2 * e * ss, nu - ts / 2 + e * t0, -tt + e * (nu + ts / 2)]
    return power + _gb_sum(numer, p.bp) - _gb_sum(denom, p.bp)


def k_shift_ratio(p: ConfluentParams) -> complex:
    """C_{k+2}/C_k, the extra turn of the branched power in P^{(k)}"""
    return cmath.exp(2j * math.pi * p.exponent())


def _nu_phase(p: ConfluentParams, mirror: int) -> complex:
    """i pi nu (-1)^k (mirror (theta_t - theta0) - nu - iQ)"""
    return 1j * math.pi * p.nu * p.parity.sign * (mirror * (p.theta_t - p.theta0) - p.nu - 1j * p.bp.Q)


def n1_log(p: ConfluentParams) -> complex:
    t0, tt, ts, nu, ss = p.theta0, p.theta_t, p.theta_star, p.nu, p.sigma_s
    half = 0.5j * p.bp.Q
    power = BranchedPower(p.bp.b, -p.exponent(), p.parity.branch).log()
    numer, denom = [], []
    for e in (1, -1):
        numer += [2 * e * ss - half, e * (ts / 2 - nu) - t0, tt + e * (ts / 2 + nu)]
        denom += [ts + e * ss, -tt - ss + e * t0, -tt + ss + e * t0]
    return _nu_phase(p, 1) + power + _gb_sum(numer, p.bp) - _gb_sum(denom, p.bp)


def n2_log(p: ConfluentParams) -> complex:
    t0, tt, ts = p.theta0, p.theta_t, p.theta_star
    half = 0.5j * p.bp.Q
    phase = -p.parity.sign * 1j * math.pi * (ts / 2 - t0 - half) * (tt - ts / 2 - half)
    return phase + _sb_sum([half - 2 * tt], p.bp) - _sb_sum([-half - t0 - ts + tt], p.bp)


def _ren_reduced(p: ConfluentParams, skip_hahn_zero: bool = False) -> complex:
    t0, tt, ts, nu, ss = p.theta0, p.theta_t, p.theta_star, p.nu, p.sigma_s
    denom = [t0 - ts / 2 + nu, -ts / 2 - tt - nu]
    if not skip_hahn_zero:
        denom.append(ts / 2 - tt + nu)
    return n2_log(p) + _nu_phase(p, 1) + _sb_sum([ss - ts, -ss - ts], p.bp) - _sb_sum(denom, p.bp)


def ren_prefactor_log(p: ConfluentParams) -> complex:
    """ln(N1 N2 P^{(k)}) in its reduced s_b form"""
    return _ren_reduced(p)


def n3_log(p: ConfluentParams) -> complex:
    t0, tt, ts, nu, ss = p.theta0, p.theta_t, p.theta_star, p.nu, p.sigma_s
    half = 0.5j * p.bp.Q
    power = BranchedPower(p.bp.b, -p.exponent(), p.parity.branch).log()
    numer, denom = [], []
    for e in (1, -1):
        numer += [2 * e * ss - half, t0 + e * (ts / 2 - nu), e * (ts / 2 + nu) - tt]
        denom += [e * ss - ts, -t0 + e * tt + ss, -t0 + e * tt - ss]
    return _nu_phase(p, -1) + power + _gb_sum(numer, p.bp) - _gb_sum(denom, p.bp)


def n4_log(p: ConfluentParams) -> complex:
    t0, tt, ts = p.theta0, p.theta_t, p.theta_star
    half = 0.5j * p.bp.Q
    phase = p.parity.sign * 1j * math.pi * (t0 + ts / 2 - half) * (ts / 2 + tt + half)
    return phase + _sb_sum([-2 * t0 + half, -t0 - ts + tt + half], p.bp)


def _hat_reduced(p: ConfluentParams, skip_jacobi_zero: bool = False) -> complex:
    t0, tt, ts, nu, ss = p.theta0, p.theta_t, p.theta_star, p.nu, p.sigma_s
    numer = [t0 + ts / 2 - nu, t0 - tt - ss]
    if not skip_jacobi_zero:
        numer.append(t0 - tt + ss)
    return n4_log(p) + _nu_phase(p, -1) + _sb_sum(numer, p.bp)


def hat_prefactor_log(p: ConfluentParams) -> complex:
    """ln(N3 N4 P^{(k)}) in its reduced s_b form"""
    return _hat_reduced(p)


# ---------------------------------------------------------------------------
# kernels

def _extract(p: ConfluentParams, upward: List[PoleSequence], downward: List[PoleSequence],
             extract: Sequence[ResidueExtraction]) -> List[complex]:
    """Pull downward members above the contour; returns the -2 pi i Res terms"""
    numer, denom = _shifts(p)
    rate = _phase_rate(p)
    den = np.array(denom)
    terms = []
    for ex in extract:
        if ex.label not in _NUMER_LABELS:
            raise ValueError(f"unknown downward sequence {ex.label!r}, expected one of {list(_NUMER_LABELS)}")
        own = _NUMER_LABELS.index(ex.label)
        index = next(i for i, s in enumerate(downward) if s.label == ex.label)
        seq = downward[index]
        lattice = seq.lattice(ex.count + 1)
        downward[index] = seq.shifted(-1j * lattice[-1][0])
        others = np.array([a for i, a in enumerate(numer) if i != own])
        for offset, m, l in lattice[:-1]:
            pole = seq.member(offset)
            upward.append(PoleSequence(pole, Orientation.UPWARD, seq.step_b, seq.step_binv,
                                       f"{ex.label}[{m},{l}]"))
            rest = rate * pole + np.sum(sb_log(pole + others, p.bp)) - np.sum(sb_log(pole + den, p.bp))
            residue = sb_residue(m, l, p.bp) * complex(np.exp(rest))
            terms.append(ensure_finite(-2j * math.pi * residue, f"residue at {pole}"))
            logger.debug("extracted pole %s (%d, %d) of %s", pole, m, l, ex.label)
    return terms


def _ck_integral(p: ConfluentParams, qs: QuadratureSettings, clearance: float = DEFAULT_CLEARANCE,
                 strip: Optional[Tuple[float, float]] = None,
                 extract: Sequence[ResidueExtraction] = (),
                 rule: str = "adaptive") -> Tuple[complex, float, List[complex]]:
    upward, downward = ck_pole_data(p)
    extract = with_crossings(extract, crossing_counts(upward, downward, clearance, Orientation.DOWNWARD))
    residues = _extract(p, upward, downward, extract)
    band = strip if strip is not None else (-p.bp.Q / 2.0, 0.0)
    path = route_contour(upward, downward, band, clearance)
    left, right, decay = tail_slopes(p)
    if left or right:
        reach = max(abs(s.anchor.real) for s in upward + downward) + 1.0
        path = path.with_tails(max(reach, path.core_extent() + clearance), left, right)
        logger.debug("tilted tails %.3g / %.3g for nu = %s", left, right, p.nu)
    settings = qs.with_decay(decay)
    integrand = lambda x: np.exp(ck_integrand_log(x, p))
    if rule == "adaptive":
        integral, err = integrate_along(integrand, path, settings)
    elif rule == "fixed":
        integral = fixed_rule_integral(integrand, path, settings, panels_per_unit=ORACLE_PANELS)
        err = 0.0
    else:
        raise ValueError(f"unknown rule {rule!r}, expected 'adaptive' or 'fixed'")
    return integral, err, residues


def _evaluate(p: ConfluentParams, qs: QuadratureSettings, prefactor_log: complex, what: str,
              **kwargs) -> KernelValue:
    integral, err, residues = _ck_integral(p, qs, **kwargs)
    pref = cmath.exp(prefactor_log)
    value = pref * (integral + csum(residues))
    return KernelValue(ensure_finite(value, what), err * abs(pref), len(residues))


def ck_kernel(p: ConfluentParams, qs: QuadratureSettings, **kwargs) -> KernelValue:
    """
    C_k = P^{(k)} times the routed contour integral of I^{(k)}.

    Keyword arguments are those of fusion_kernel; ``extract`` names downward
    sequences (see _NUMER_LABELS) whose lowest members are taken as residues.
    """
    return _evaluate(p, qs, ck_prefactor_log(p), f"C_{p.k}", **kwargs)


def ck_ren(p: ConfluentParams, qs: QuadratureSettings, **kwargs) -> KernelValue:
    return _evaluate(p, qs, ren_prefactor_log(p), f"C_{p.k}^ren", **kwargs)


def chat_ren(p: ConfluentParams, qs: QuadratureSettings, **kwargs) -> KernelValue:
    return _evaluate(p, qs, hat_prefactor_log(p), f"Chat_{p.k}^ren", **kwargs)


class ConfluentFamily(Enum):
    C = "C"
    REN = "ren"
    HAT = "hat"


_EVALUATORS = {ConfluentFamily.C: ck_kernel, ConfluentFamily.REN: ck_ren, ConfluentFamily.HAT: chat_ren}


# ---------------------------------------------------------------------------
# difference operators

def _lg(values: Sequence[complex]) -> complex:
    with np.errstate(all="ignore"):
        return complex(np.sum(loggamma(np.array(values, dtype=complex))))


def hc_plus(p: ConfluentParams, bp: BParameter, nu: complex) -> complex:
    """H_{C_k}^+(nu)"""
    b, t0, tt, ts = bp.b, p.theta0, p.theta_t, p.theta_star
    base = b * bp.Q / 2
    denom = [base + 1j * b * (e * t0 + ts / 2 - nu) for e in (1, -1)]
    denom += [base + 1j * b * (e * tt - ts / 2 - nu) for e in (1, -1)]
    lead = -4 * math.pi * b * p.parity.half_prev * (1j * b + 2 * nu)
    return 4 * math.pi ** 2 * cmath.exp(lead - _lg(denom))


def hc_minus(p: ConfluentParams, bp: BParameter, nu: complex) -> complex:
    """H_{C_k}^-(nu)"""
    b, t0, tt, ts = bp.b, p.theta0, p.theta_t, p.theta_star
    base = b * bp.Q / 2
    denom = [base + 1j * b * (e * t0 - ts / 2 + nu) for e in (1, -1)]
    denom += [base + 1j * b * (e * tt + ts / 2 + nu) for e in (1, -1)]
    lead = -4 * math.pi * b * p.parity.shift * (1j * b - 2 * nu)
    return 4 * math.pi ** 2 * cmath.exp(lead - _lg(denom))


def hc_zero(p: ConfluentParams, bp: BParameter, nu: complex) -> complex:
    b, t0, tt, ts = bp.b, p.theta0, p.theta_t, p.theta_star
    pb, sign, ib2 = math.pi * b, p.parity.sign, 0.5j * b
    first = (4 * cmath.exp(sign * pb * (t0 + tt + 2 * nu))
             * cmath.cosh(pb * (ib2 + t0 + ts / 2 - nu)) * cmath.cosh(pb * (ib2 - ts / 2 + tt - nu)))
    second = (4 * cmath.exp(-sign * pb * (t0 + tt - 2 * nu))
              * cmath.cosh(pb * (ib2 + tt + ts / 2 + nu)) * cmath.cosh(pb * (ib2 - ts / 2 + t0 + nu)))
    return first + second - 2 * cmath.cosh(2 * pb * (ib2 + t0 + tt))


def hct_plus(p: ConfluentParams, bp: BParameter, sigma: complex) -> complex:
    """Htilde_{C_k}^+(sigma); the minus coefficient is hct_plus at -sigma"""
    b, t0, tt, ts = bp.b, p.theta0, p.theta_t, p.theta_star
    par = p.parity
    ibs = 2j * b * sigma
    numer = [1 + ibs, 1 - b * b + ibs, -2 * b * b + ibs, -b * b + ibs]
    half = (1 - b * b) / 2
    denom = []
    for e1 in (1, -1):
        denom.append(half - 1j * b * (e1 * ts - sigma))
        denom += [half - 1j * b * (e1 * t0 + e2 * tt - sigma) for e2 in (1, -1)]
    lead = -2 * math.pi * b * (sigma + 0.5j * b) * (par.half_prev + par.half - 0.5)
    return 2 * math.pi * cmath.exp(lead + _lg(numer) - _lg(denom))


def v_k(p: ConfluentParams, bp: BParameter, sigma: complex, theta_t: float) -> complex:
    """V_k(sigma, theta_t)"""
    b, t0, ts = bp.b, p.theta0, p.theta_star
    pb, ib2 = math.pi * b, 0.5j * b
    numer = (2 * cmath.exp(-p.parity.sign * pb * (sigma - ib2)) * cmath.cosh(pb * (ib2 + ts - sigma)))
    for e in (1, -1):
        numer *= cmath.cosh(pb * (-ib2 - theta_t + sigma + e * t0))
    return numer / (cmath.sinh(pb * (2 * sigma - 1j * b)) * cmath.sinh(2 * pb * sigma))


def hct_zero(p: ConfluentParams, bp: BParameter, sigma: complex) -> complex:
    b = bp.b
    lead = -cmath.exp(p.parity.sign * math.pi * b * (1j * b + p.theta_star + 2 * p.theta_t))
    return lead + v_k(p, bp, sigma, p.theta_t) + v_k(p, bp, -sigma, p.theta_t)


def ren_shift(p: ConfluentParams, bp: BParameter, nu: complex, direction: int) -> complex:
    """H_{C_k^ren}^{+-}(nu) for direction = +-1"""
    b, t0, tt, ts = bp.b, p.theta0, p.theta_t, p.theta_star
    pb, d, ib2 = math.pi * b, direction, 0.5j * b
    return (-4 * cmath.exp(-d * pb * p.parity.sign * (t0 - tt - d * 2 * nu))
            * cmath.cosh(pb * (ib2 + t0 - d * ts / 2 + d * nu))
            * cmath.cosh(pb * (ib2 - tt + d * ts / 2 + d * nu)))


def hat_shift(p: ConfluentParams, bp: BParameter, nu: complex, direction: int) -> complex:
    """H_{Chat_k^ren}^{+-}(nu) for direction = +-1"""
    b, t0, tt, ts = bp.b, p.theta0, p.theta_t, p.theta_star
    pb, d, ib2 = math.pi * b, direction, 0.5j * b
    return (-4 * cmath.exp(d * pb * p.parity.sign * (t0 - tt + d * 2 * nu))
            * cmath.cosh(pb * (ib2 - t0 - d * ts / 2 + d * nu))
            * cmath.cosh(pb * (ib2 + tt + d * ts / 2 + d * nu)))


def hat_dual_plus(p: ConfluentParams, bp: BParameter, sigma: complex) -> complex:
    """Htilde_{Chat_k^ren}^+(sigma)"""
    b, t0, tt, ts = bp.b, p.theta0, p.theta_t, p.theta_star
    pb, ib2 = math.pi * b, 0.5j * b
    numer = -2 * cmath.exp(p.parity.sign * pb * (sigma + ib2)) * cmath.cosh(pb * (ib2 - ts + sigma))
    for e in (1, -1):
        numer *= cmath.cosh(pb * (ib2 - t0 + sigma + e * tt))
    return numer / (cmath.sinh(2 * pb * sigma) * cmath.sinh(pb * (1j * b + 2 * sigma)))


def u_factor(p: ConfluentParams, nu: complex, theta_star: float) -> complex:
    """N1(nu)/N1(nu + ib) in closed form"""
    b, t0, tt = p.bp.b, p.theta0, p.theta_t
    ts, sign, half = theta_star, p.parity.sign, p.parity.half
    lead = (2 * math.pi * b * (2 * nu + 1j * b) * (2 * half - 1)
            + math.pi * b * sign * (-2j * b - t0 + tt - 2 * nu))
    upper, lower = b * p.bp.Q / 2, (1 - b * b) / 2
    numer = [upper + 1j * b * (t0 + ts / 2 - nu), upper - 1j * b * (ts / 2 + tt + nu)]
    denom = [lower + 1j * b * (t0 + nu - ts / 2), lower + 1j * b * (ts / 2 - tt + nu)]
    return -cmath.exp(lead + _lg(numer) - _lg(denom))


def v_factor(p: ConfluentParams, sigma: complex) -> complex:
    """N1(sigma)/N1(sigma + ib) in closed form"""
    b, t0, tt, ts = p.bp.b, p.theta0, p.theta_t, p.theta_star
    upper, lower = b * p.bp.Q / 2, (1 - b * b) / 2
    ibs = 2j * b * sigma
    numer = [b * b - ibs, -ibs, lower + 1j * b * (sigma - ts)]
    numer += [lower + 1j * b * (e * t0 + tt + sigma) for e in (1, -1)]
    denom = [ibs - 2 * b * b, ibs - b * b, upper - 1j * b * (ts + sigma)]
    denom += [upper + 1j * b * (e * t0 + tt - sigma) for e in (1, -1)]
    lead = math.pi * b * (2 * sigma + 1j * b) * (2 * p.parity.half - 1)
    return cmath.exp(lead + _lg(numer) - _lg(denom))


def s_factor(p: ConfluentParams, theta_star: float, nu: complex) -> complex:
    """N3(nu)/N3(nu + ib) in closed form"""
    b, t0, tt = p.bp.b, p.theta0, p.theta_t
    ts, par = theta_star, p.parity
    upper, lower = b * p.bp.Q / 2, (1 - b * b) / 2
    lead = (4 * math.pi * b * (2 * nu + 1j * b) * par.shift
            + math.pi * b * par.sign * (-2j * b + t0 - tt - 2 * nu))
    numer = [upper - 1j * b * (t0 + nu - ts / 2), upper - 1j * b * (ts / 2 - tt + nu)]
    denom = [lower - 1j * b * (t0 + ts / 2 - nu), lower + 1j * b * (ts / 2 + tt + nu)]
    return -cmath.exp(lead + _lg(numer) - _lg(denom))


def r_factor(p: ConfluentParams, sigma: complex) -> complex:
    """N3(sigma)/N3(sigma + ib) in closed form"""
    b, t0, tt, ts = p.bp.b, p.theta0, p.theta_t, p.theta_star
    upper, lower = b * p.bp.Q / 2, (1 - b * b) / 2
    ibs = 2j * b * sigma
    numer = [b * b - ibs, -ibs, lower + 1j * b * (ts + sigma)]
    numer += [lower + 1j * b * (t0 + e * tt + sigma) for e in (1, -1)]
    denom = [ibs - b * b, ibs - 2 * b * b, upper + 1j * b * (ts - sigma)]
    denom += [upper + 1j * b * (t0 + e * tt - sigma) for e in (1, -1)]
    lead = 4 * math.pi * b * (sigma + 0.5j * b) * p.parity.shift
    return cmath.exp(lead + _lg(numer) - _lg(denom))


class ConfluentOperator(Enum):
    H_C = "H_C"                  # on nu
    H_C_DUAL = "H~_C"            # on sigma_s
    H_REN = "H_Cren"
    H_REN_DUAL = "H~_Cren"
    H_HAT = "H_Chat"
    H_HAT_DUAL = "H~_Chat"


_ON_NU = (ConfluentOperator.H_C, ConfluentOperator.H_REN, ConfluentOperator.H_HAT)
_FAMILY_OPERATORS = {
    ConfluentFamily.C: (ConfluentOperator.H_C, ConfluentOperator.H_C_DUAL),
    ConfluentFamily.REN: (ConfluentOperator.H_REN, ConfluentOperator.H_REN_DUAL),
    ConfluentFamily.HAT: (ConfluentOperator.H_HAT, ConfluentOperator.H_HAT_DUAL),
}


def _step_parameter(p: ConfluentParams, step: str) -> BParameter:
    if step == "b":
        return p.bp
    if step == "binv":
        return BParameter(1.0 / p.bp.b)
    raise ValueError(f"unknown step {step!r}, expected 'b' or 'binv'")


def build_confluent_operator(name, p: ConfluentParams, step: str = "b") -> ThreeTermOperator:
    """
    Three-term operator in nu or sigma_s with additive shift i*step.

    With step "binv" the renormalized operators are rebuilt at 1/b. The raw
    C_k is not b -> 1/b symmetric, so its 1/b coefficients are conjugated by
    b^{-4 nu^2} (nu operator) or b^{-2 Delta(sigma_s)} (sigma_s operator).
    """
    kind = name if isinstance(name, ConfluentOperator) else ConfluentOperator(name)
    bp = _step_parameter(p, step)
    s = bp.b

    if kind is ConfluentOperator.H_C:
        plus = lambda v: hc_plus(p, bp, v)
        minus = lambda v: hc_minus(p, bp, v)
        zero = lambda v: hc_zero(p, bp, v)
    elif kind is ConfluentOperator.H_C_DUAL:
        plus = lambda v: hct_plus(p, bp, v)
        minus = lambda v: hct_plus(p, bp, -v)
        zero = lambda v: hct_zero(p, bp, v)
    elif kind is ConfluentOperator.H_REN:
        plus = lambda v: ren_shift(p, bp, v, 1)
        minus = lambda v: ren_shift(p, bp, v, -1)
        zero = lambda v: hc_zero(p, bp, v)
    elif kind is ConfluentOperator.H_REN_DUAL:
        plus = lambda v: -v_k(p, bp, -v, -p.theta_t)
        minus = lambda v: -v_k(p, bp, v, -p.theta_t)
        zero = lambda v: hct_zero(p, bp, v)
    elif kind is ConfluentOperator.H_HAT:
        plus = lambda v: hat_shift(p, bp, v, 1)
        minus = lambda v: hat_shift(p, bp, v, -1)
        zero = lambda v: hc_zero(p, bp, v)
    else:
        plus = lambda v: hat_dual_plus(p, bp, v)
        minus = lambda v: hat_dual_plus(p, bp, -v)
        zero = lambda v: hct_zero(p, bp, v)

    if step == "binv" and kind in (ConfluentOperator.H_C, ConfluentOperator.H_C_DUAL):
        weight = 4 if kind is ConfluentOperator.H_C else 2
        log_b = math.log(p.bp.b)
        raw_plus, raw_minus = plus, minus
        plus = lambda v: raw_plus(v) * cmath.exp(weight * ((v + 1j * s) ** 2 - v * v) * log_b)
        minus = lambda v: raw_minus(v) * cmath.exp(weight * ((v - 1j * s) ** 2 - v * v) * log_b)

    variable = "nu" if kind in _ON_NU else "sigma_s"
    return ThreeTermOperator(f"{kind.value}[{step}]", plus, zero, minus, ShiftKind.ADDITIVE,
                             step=1j * s, variable=variable)


def confluent_eigenvalue(name, p: ConfluentParams, step: str = "b") -> complex:
    """2cosh(2 pi s sigma_s) for the nu operators, e^{(-1)^{k+1} 2 pi s nu} for the sigma_s ones"""
    kind = name if isinstance(name, ConfluentOperator) else ConfluentOperator(name)
    s = _step_parameter(p, step).b
    if kind in _ON_NU:
        return 2 * cmath.cosh(2 * math.pi * s * p.sigma_s)
    return cmath.exp(-p.parity.sign * 2 * math.pi * s * p.nu)


def _along(evaluate: Callable[[ConfluentParams], KernelValue], p: ConfluentParams,
           variable: str) -> Callable[[complex], complex]:
    if variable == "nu":
        return lambda v: evaluate(p.with_nu(v)).value
    return lambda v: evaluate(p.with_sigma_s(v)).value


def verify_ck_eigen(p: ConfluentParams, which: int, qs: QuadratureSettings, family: str = "C",
                    **kwargs) -> float:
    """
    Relative residual of one of the four eigen-equations:
    1 nu operator at b, 2 nu operator at 1/b, 3 sigma_s operator at b,
    4 sigma_s operator at 1/b.
    """
    if which not in (1, 2, 3, 4):
        raise ValueError(f"which must be 1..4, got {which}")
    fam = ConfluentFamily(family)
    kind = _FAMILY_OPERATORS[fam][0 if which <= 2 else 1]
    step = "b" if which % 2 else "binv"
    op = build_confluent_operator(kind, p, step)
    evaluate = _EVALUATORS[fam]
    f = _along(lambda q: evaluate(q, qs, **kwargs), p, op.variable)
    residual = eigen_residual(op, f, getattr(p, op.variable), confluent_eigenvalue(kind, p, step))
    logger.debug("%s residual %.3e for k=%d", op.name, residual, p.k)
    return residual


def conjugation_gap(p: ConfluentParams, family: str = "ren", variable: str = "nu") -> Dict[str, float]:
    """
    Conjugating H_{C_k} by N1 (ren) or N3 (hat) must give the renormalized
    operator. Reports the closed-form ratio against the ratio of the
    normalizations themselves, and the conjugated coefficients against the
    renormalized ones.
    """
    fam = ConfluentFamily(family)
    if fam is ConfluentFamily.C:
        raise ValueError("conjugation_gap compares a renormalized family, 'ren' or 'hat'")
    b, sign = p.bp.b, p.parity.sign
    t0, tt, ts = p.theta0, p.theta_t, p.theta_star
    on_nu = variable == "nu"
    if variable not in ("nu", "sigma_s"):
        raise ValueError(f"unknown variable {variable!r}, expected 'nu' or 'sigma_s'")
    v = p.nu if on_nu else p.sigma_s
    norm = n1_log if fam is ConfluentFamily.REN else n3_log
    move = p.with_nu if on_nu else p.with_sigma_s

    if fam is ConfluentFamily.REN and on_nu:
        closed = (u_factor(p, v, ts), cmath.exp(sign * 2 * math.pi * b * (1j * b + t0 - tt)) * u_factor(p, -v, -ts))
    elif fam is ConfluentFamily.REN:
        closed = (v_factor(p, v), v_factor(p, -v))
    elif on_nu:
        closed = (s_factor(p, ts, v), cmath.exp(-sign * 2 * math.pi * b * (-1j * b + t0 - tt)) * s_factor(p, -ts, -v))
    else:
        closed = (r_factor(p, v), r_factor(p, -v))
    direct = tuple(cmath.exp(norm(move(v)) - norm(move(v + d * 1j * b))) for d in (1, -1))

    raw = build_confluent_operator(ConfluentOperator.H_C if on_nu else ConfluentOperator.H_C_DUAL, p)
    kinds = _FAMILY_OPERATORS[fam]
    target = build_confluent_operator(kinds[0] if on_nu else kinds[1], p)
    got = (raw.plus(v) * closed[0], raw.minus(v) * closed[1])
    want = (target.plus(v), target.minus(v))
    return {
        "closed_vs_direct": max(_relative(c, d) for c, d in zip(closed, direct)),
        "operator": max(_relative(g, w) for g, w in zip(got, want)),
    }


def _relative(got: complex, want: complex) -> float:
    return abs(got - want) / max(1.0, abs(want))


# ---------------------------------------------------------------------------
# X Y Z decomposition of C_k after x -> x - nu

def _x_log(p: ConfluentParams, x: complex, nu: complex) -> complex:
    bp, t0, tt, ts = p.bp, p.theta0, p.theta_t, p.theta_star
    par, half = p.parity, 0.5j * bp.Q
    log = (-2 * nu * nu * math.log(bp.b) - 4j * math.pi * nu * nu * par.shift
           + par.sign * 1j * math.pi * nu * (half - x + ts / 2 + tt + nu))
    denom = [nu - ts / 2 + e * t0 for e in (1, -1)] + [e * (ts / 2 + nu) - tt for e in (1, -1)]
    return log - _sb_sum([x + half - nu], bp) - _gb_sum(denom, bp)


def _y_log(p: ConfluentParams, x: complex, sigma: complex) -> complex:
    bp, t0, tt, ts = p.bp, p.theta0, p.theta_t, p.theta_star
    half, dim = 0.5j * bp.Q, conformal_weight(sigma, bp)
    log = -dim * (math.log(bp.b) + 2j * math.pi * p.parity.shift)
    numer, denom, sdenom = [], [], []
    for e in (1, -1):
        numer += [e * sigma - ts, e * sigma - t0 - tt, e * sigma + t0 - tt]
        denom.append(2 * e * sigma - half)
        sdenom.append(x + half - ts / 2 - tt + e * sigma)
    return log + _gb_sum(numer, bp) - _gb_sum(denom, bp) - _sb_sum(sdenom, bp)


def _z_log(p: ConfluentParams, x: complex) -> complex:
    bp, t0, tt, ts = p.bp, p.theta0, p.theta_t, p.theta_star
    half = 0.5j * bp.Q
    weight = conformal_weight(t0, bp) + conformal_weight(tt, bp) + ts ** 2 / 2
    log = (-p.parity.sign * 1j * math.pi * x * (ts / 2 + tt + half)
           + weight * (math.log(bp.b) + 2j * math.pi * p.parity.shift))
    return log + _sb_sum([x - t0 - ts / 2, x + t0 - ts / 2, x + ts / 2 - tt], bp)


def _psi(p: ConfluentParams, x: complex, nu: complex) -> complex:
    b, t0, tt, ts = p.bp.b, p.theta0, p.theta_t, p.theta_star
    pb, ib2 = math.pi * b, 0.5j * b
    value = (-4j * cmath.exp(p.parity.sign * pb * (tt + nu + 0.5j * p.bp.Q + ts / 2))
             * cmath.cosh(pb * (x + ib2 + ts / 2 - tt)) / cmath.sinh(pb * (x + 1j * b - nu)))
    for e in (1, -1):
        value *= cmath.cosh(pb * (x + ib2 + e * t0 - ts / 2))
    return value


def xyz_identities(p: ConfluentParams, x: complex) -> Dict[str, float]:
    """Residuals of the X, Y, Z shift identities and of the H_{C_k} action on X at x"""
    b, t0, tt, ts, nu = p.bp.b, p.theta0, p.theta_t, p.theta_star, p.nu
    pb, sign, ib = math.pi * b, p.parity.sign, 1j * b
    x = complex(x)
    try:
        lx, ly, lz = _x_log(p, x, nu), _y_log(p, x, p.sigma_s), _z_log(p, x)
        lx1, ly1, lz1 = _x_log(p, x - ib, nu), _y_log(p, x - ib, p.sigma_s), _z_log(p, x - ib)
        for value in (lx, ly, lz, lx1, ly1, lz1):
            ensure_finite(value, "XYZ factor")
    except (ZeroDivisionError, OverflowError, NonFiniteSample) as exc:
        raise SingularPoint(f"x = {x} is singular for the XYZ factors: {exc}") from exc

    out = {}
    out["X"] = _relative(cmath.exp(lx1 - lx), 2j * cmath.exp(-sign * pb * nu) * cmath.sinh(pb * (x - nu)))
    out["Y"] = _relative(cmath.exp(ly1 - ly),
                         2 * cmath.cosh(2 * pb * p.sigma_s) - 2 * cmath.cosh(pb * (2 * x - ts - 2 * tt)))
    cosh_prod = 8.0 + 0j
    for shift in (-t0 - ts / 2, t0 - ts / 2, ts / 2 - tt):
        cosh_prod *= cmath.cosh(pb * (x - 0.5j * b + shift))
    out["Z"] = _relative(cmath.exp(lz1 - lz),
                         cmath.exp(-sign * pb / 2 * (ts + 2 * tt + 1j * p.bp.Q)) / cosh_prod)

    op = build_confluent_operator(ConfluentOperator.H_C, p)
    applied = op.apply(lambda v: cmath.exp(_x_log(p, x, v) - lx), nu)
    out["HX"] = _relative(applied, 2 * cmath.cosh(pb * (2 * x - ts - 2 * tt)) + _psi(p, x, nu))
    out["psiXZ"] = _relative(_psi(p, x - ib, nu) * cmath.exp(lx1 + lz1 - lx - lz), 1.0)
    return out


# ---------------------------------------------------------------------------
# confluent limit out of M

def _limit_index(p: ConfluentParams, eps: int) -> int:
    """j of L_j, with eps = +1 reaching C_{2j} and eps = -1 reaching C_{2j-1}"""
    if eps == 1:
        if p.parity.odd:
            raise DomainError(f"eps = +1 reaches even k only, got k = {p.k}")
        return p.k // 2
    if eps == -1:
        if not p.parity.odd:
            raise DomainError(f"eps = -1 reaches odd k only, got k = {p.k}")
        return (p.k + 1) // 2
    raise ValueError(f"eps must be +1 or -1, got {eps}")


def confluent_fusion_params(p: ConfluentParams, eps: int, lam: float) -> FusionParams:
    """theta_inf, theta1, sigma_t sent to infinity along eps*Lambda"""
    half = eps * lam / 2
    return FusionParams(p.bp, p.theta0, p.theta_t, half + p.theta_star / 2, half - p.theta_star / 2,
                        p.sigma_s, half - p.nu)


def l_factor_log(p: ConfluentParams, eps: int, lam: float, nu: Optional[complex] = None,
                 sigma_s: Optional[complex] = None) -> complex:
    """ln L_j(eps*Lambda) at the given nu and sigma_s"""
    j = _limit_index(p, eps)
    bp = p.bp
    nu = p.nu if nu is None else nu
    dims = (-conformal_weight((p.theta_star + eps * lam) / 2, bp) - conformal_weight(p.theta_t, bp)
            + conformal_weight(eps * lam / 2 - nu, bp))
    power = BranchedPower(1j * bp.b * eps * lam, p.exponent(nu, sigma_s), 2 * math.pi * (j - 1))
    return -1j * math.pi * dims + power.log()


def confluent_limit_check(p: ConfluentParams, eps: int, lambdas: Sequence[float] = DEFAULT_LAMBDAS,
                          qs: Optional[QuadratureSettings] = None, **kwargs) -> List[float]:
    """|L_j(eps Lambda) M - C_k| for each Lambda; k = p.k must match the parity eps selects"""
    qs = qs or QuadratureSettings()
    _limit_index(p, eps)
    reference = ck_kernel(p, qs, **kwargs).value
    out = []
    for lam in lambdas:
        fp = confluent_fusion_params(p, eps, lam)
        value = cmath.exp(l_factor_log(p, eps, lam)) * m_kernel(fp, qs, **kwargs).value
        out.append(abs(value - reference))
        logger.info("confluent limit Lambda=%g: |L M - C_%d| = %.3e", lam, p.k, out[-1])
    return out


def x_coefficient(p: ConfluentParams, j: int, lam: float) -> complex:
    """X_j(Lambda, nu); tends to 1"""
    b, t0, tt, ts, nu = p.bp.b, p.theta0, p.theta_t, p.theta_star, p.nu
    d = lam - 2 * nu
    ij = 1j * j
    power = -2 * b * (b - 2 * ij * nu) * cmath.log(ij * b * lam)
    numer = [b * (b + ij * d), b * b + ij * d * b + 1, 2 * b * b + ij * d * b + 1, ij * b * d]
    upper = b * p.bp.Q / 2
    denom = [upper - ij * b * (e * t0 + ts / 2 - lam + nu) for e in (1, -1)]
    denom += [upper + ij * b * (ts / 2 + e * tt + lam - nu) for e in (1, -1)]
    return cmath.exp(power + _lg(numer) - _lg(denom))


def j_coefficient(p: ConfluentParams, j: int, lam: float) -> complex:
    """J_j(Lambda, nu); tends to 4 e^{j pi b (theta0 + theta_t + 2 j nu)}"""
    b, t0, tt, ts, nu = p.bp.b, p.theta0, p.theta_t, p.theta_star, p.nu
    pb = math.pi * b
    numer = (4 * j * cmath.cosh(pb * (-0.5j * b - t0 + ts * j / 2 - j * lam + j * nu))
             * cmath.cosh(pb * (-0.5j * b - tt - ts * j / 2 - j * lam + j * nu)))
    return numer / (cmath.sinh(pb * (lam - 2 * nu)) * cmath.sinh(pb * (1j * b + j * lam - 2 * j * nu)))


def chi_coefficient(p: ConfluentParams, lam: float, sigma: complex) -> complex:
    """chi(Lambda, sigma); chi e^{-pi b Lambda} tends to 1"""
    b = p.bp.b
    lower = (1 - b * b) / 2
    log = (math.pi * b * (sigma + 0.5j * b) - b * (b - 2j * sigma) * cmath.log(1j * b * lam)
           - _lg([lower - 1j * b * (lam - sigma), lower + 1j * b * (lam + sigma)]))
    return 2 * math.pi * cmath.exp(log)


@dataclass(frozen=True)
class OperatorDeviation:
    lam: float
    deviation: float
    tracked: Tuple[Tuple[str, complex], ...] = ()


def conjugated_m_operator(p: ConfluentParams, eps: int, lam: float, dual: bool = False) -> ThreeTermOperator:
    """
    L_j H_M L_j^{-1} written in nu (sigma_t = eps Lambda/2 - nu, so the shifts
    swap), or e^{-pi b Lambda} L_j Htilde_M L_j^{-1} in sigma_s.
    """
    fp = confluent_fusion_params(p, eps, lam)
    ib = 1j * p.bp.b
    if not dual:
        hm = build_fusion_operator(FusionOperator.H_M, fp)
        ell = lambda v: l_factor_log(p, eps, lam, nu=v)
        st = lambda v: eps * lam / 2 - v
        plus = lambda v: hm.minus(st(v)) * cmath.exp(ell(v) - ell(v + ib))
        minus = lambda v: hm.plus(st(v)) * cmath.exp(ell(v) - ell(v - ib))
        zero = lambda v: hm.zero(st(v))
        return ThreeTermOperator(f"L H_M L^-1[{lam:g}]", plus, zero, minus, ShiftKind.ADDITIVE,
                                 step=ib, variable="nu")
    hmd = build_fusion_operator(FusionOperator.H_M_DUAL, fp)
    scale = math.exp(-math.pi * p.bp.b * lam)
    ell = lambda v: l_factor_log(p, eps, lam, sigma_s=v)
    plus = lambda v: scale * hmd.plus(v) * cmath.exp(ell(v) - ell(v + ib))
    minus = lambda v: scale * hmd.minus(v) * cmath.exp(ell(v) - ell(v - ib))
    zero = lambda v: scale * hmd.zero(v)
    return ThreeTermOperator(f"L H~_M L^-1[{lam:g}]", plus, zero, minus, ShiftKind.ADDITIVE,
                             step=ib, variable="sigma_s")


def operator_convergence_check(p: ConfluentParams, dual: bool = False, lambdas: Sequence[float] = DEFAULT_LAMBDAS,
                               eps: int = 1) -> List[OperatorDeviation]:
    """
    Largest relative coefficient gap between the conjugated M operator and
    H_{C_k} (or Htilde_{C_k}) for each Lambda, with the auxiliary X, J and chi
    coefficients normalized by their limits.
    """
    _limit_index(p, eps)
    target = build_confluent_operator(ConfluentOperator.H_C_DUAL if dual else ConfluentOperator.H_C, p)
    point = p.sigma_s if dual else p.nu
    want = target.coefficients(point)
    b = p.bp.b
    out = []
    for lam in lambdas:
        got = conjugated_m_operator(p, eps, lam, dual).coefficients(point)
        deviation = max(_relative(g, w) for g, w in zip(got, want))
        if dual:
            scale = math.exp(-math.pi * b * lam)
            tracked = (("chi+", chi_coefficient(p, lam, p.sigma_s) * scale),
                       ("chi-", chi_coefficient(p, lam, -p.sigma_s) * scale))
        elif eps == 1:
            tracked = tuple(
                item for j in (1, -1) for item in (
                    (f"X{j:+d}", x_coefficient(p, j, lam)),
                    (f"J{j:+d}", j_coefficient(p, j, lam)
                     / (4 * cmath.exp(j * math.pi * b * (p.theta0 + p.theta_t + 2 * j * p.nu)))),
                ))
        else:
            tracked = ()
        out.append(OperatorDeviation(float(lam), deviation, tracked))
        logger.debug("operator deviation at Lambda=%g: %.3e", lam, deviation)
    return out


# ---------------------------------------------------------------------------
# q-Hahn and q-Jacobi degenerations

def nu_limit(n: int, p: ConfluentParams) -> complex:
    """nu_n = theta_t - iQ/2 - theta_star/2 - i n b"""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return p.theta_t - 0.5j * p.bp.Q - p.theta_star / 2 - 1j * n * p.bp.b


def sigma_s_limit(n: int, p: ConfluentParams) -> complex:
    """sigma_s^{(n)} = iQ/2 + theta_t - theta0 + i n b"""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return 0.5j * p.bp.Q + p.theta_t - p.theta0 + 1j * n * p.bp.b


def map_confluent_to_hahn(p: ConfluentParams) -> Tuple[complex, complex, complex, complex]:
    """(alpha, beta, gamma, q) with q = e^{-2 i pi b^2}"""
    b, t0, tt, ts = p.bp.b, p.theta0, p.theta_t, p.theta_star
    tau = 2 * math.pi * b
    return (-cmath.exp(-tau * (t0 - tt + 0.5j * b)), -cmath.exp(tau * (t0 + tt - 0.5j * b)),
            -cmath.exp(-tau * (ts + 0.5j * b)), cmath.exp(-2j * math.pi * b * b))


def map_confluent_to_jacobi(p: ConfluentParams) -> Tuple[complex, complex, complex, complex, complex]:
    """(alpha, beta, gamma, x, q) with q = e^{-2 i pi b^2}; x carries the nu dependence"""
    b, t0, tt, ts = p.bp.b, p.theta0, p.theta_t, p.theta_star
    pb = math.pi * b
    x = -cmath.exp(pb * (-1j * b + 2 * t0 + ts)) * cmath.exp(-2 * pb * p.nu)
    return (cmath.exp(4 * pb * t0), cmath.exp(-4 * pb * tt), cmath.exp(2 * pb * (t0 + ts - tt)), x,
            cmath.exp(-2j * pb * b))


def hahn_polynomial(n: int, p: ConfluentParams) -> complex:
    """H_n(e^{2 pi b sigma_s}) with parameters and q raised to (-1)^k"""
    alpha, beta, gamma, q = (p.parity.oriented(v) for v in map_confluent_to_hahn(p))
    return hahn(n, cmath.exp(2 * math.pi * p.bp.b * p.sigma_s), alpha, beta, gamma, q)


def jacobi_polynomial(n: int, p: ConfluentParams) -> complex:
    """J_n(x^{(-1)^k}) with parameters and q raised to (-1)^k"""
    alpha, beta, gamma, x, q = (p.parity.oriented(v) for v in map_confluent_to_jacobi(p))
    return jacobi(n, x, alpha, beta, gamma, q)


def hahn_limit(n: int, p: ConfluentParams) -> complex:
    """
    C_k^ren at nu -> nu_n as the finite sum over the residues at
    x = -iQ/2 - theta_star/2 + theta_t - i m b - nu_n, m = 0..n. The zero of
    the prefactor at nu_n and the pole of each residue pair into
    s_b(iQ/2 + i b (n - m) + i m b)/s_b(iQ/2 + i b (n - m)).
    """
    q = p.with_nu(nu_limit(n, p))
    q.check_discrete_assumption()
    bp = q.bp
    numer, denom = _shifts(q)
    rate = _phase_rate(q)
    pref = _ren_reduced(q, skip_hahn_zero=True)
    terms = []
    for m in range(n + 1):
        x = sb_pole(m, 0, bp) - numer[0]
        rest = (rate * x + _sb_sum([x + numer[1], x + numer[2]], bp)
                - _sb_sum([x + denom[1], x + denom[2]], bp))
        pairing = sb_shift(0.5j * bp.Q + 1j * bp.b * (n - m), m, 0, bp)
        terms.append(-2j * math.pi * sb_residue(m, 0, bp) * cmath.exp(pref + rest) * pairing)
    return ensure_finite(csum(terms), f"q-Hahn limit n={n}")


def jacobi_limit(n: int, p: ConfluentParams) -> complex:
    """
    Chat_k^ren at sigma_s -> sigma_s^{(n)} as the finite sum over the poles of
    s_b(x - theta0 + nu - theta_star/2), m = 0..n, each paired with the zero
    of s_b(theta0 - theta_t + sigma_s) in the prefactor.
    """
    q = p.with_sigma_s(sigma_s_limit(n, p))
    q.check_discrete_assumption()
    bp = q.bp
    numer, denom = _shifts(q)
    rate = _phase_rate(q)
    pref = _hat_reduced(q, skip_jacobi_zero=True)
    terms = []
    for m in range(n + 1):
        x = sb_pole(m, 0, bp) - numer[2]
        rest = (rate * x + _sb_sum([x + numer[0], x + numer[1]], bp)
                - _sb_sum([x + denom[0], x + denom[2]], bp))
        pairing = sb_shift(0.5j * bp.Q + 1j * bp.b * (n - m), m, 0, bp)
        terms.append(-2j * math.pi * sb_residue(m, 0, bp) * cmath.exp(pref + rest) * pairing)
    return ensure_finite(csum(terms), f"q-Jacobi limit n={n}")


def hahn_finite_sum(n: int, p: ConfluentParams) -> complex:
    """The q-Hahn limit from its q-Pochhammer form, independent of the s_b machinery"""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    b, Q = p.bp.b, p.bp.Q
    t0, tt, ts, ss = p.theta0, p.theta_t, p.theta_star, p.sigma_s
    odd = 1 if p.parity.odd else 0
    tau = 2 * math.pi * b
    qm = cmath.exp(-2j * math.pi * b * b)
    pre = (cmath.exp(1j * math.pi * n * n + math.pi * b * n * (4 * tt - 1j * (n + 1) * Q)
                     - tau * n * odd * (-t0 + ts + tt))
           * qpoch(cmath.exp(tau * (1j * b * n - t0 + ts - tt)), qm, n)
           / qpoch(cmath.exp(tau * (2 * tt - 1j * b)), qm, n))
    terms = []
    for m in range(n + 1):
        weight = cmath.exp(tau * m * (1j * b * (n + 1) - 2 * tt) - tau * m * odd * (1j * b * n - 2 * tt))
        top = qpoch_multi([qm * cmath.exp(2j * math.pi * b * b * (m - n)),
                           -cmath.exp(math.pi * b * (2 * (ts - ss) + 1j * b * (2 * m - 1))),
                           -cmath.exp(math.pi * b * (2 * (ts + ss) + 1j * b * (2 * m - 1)))], qm, m)
        bottom = qpoch_multi([cmath.exp(2j * math.pi * b * b * m),
                              cmath.exp(tau * (1j * b * m - t0 + ts - tt)),
                              cmath.exp(tau * (1j * b * m + t0 + ts - tt))], qm, m)
        terms.append(weight * top / bottom)
    return pre * csum(terms)


def jacobi_finite_sum(n: int, p: ConfluentParams) -> complex:
    """The q-Jacobi limit from its q-Pochhammer form"""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    b, Q = p.bp.b, p.bp.Q
    t0, tt, ts, nu = p.theta0, p.theta_t, p.theta_star, p.nu
    even = 0 if p.parity.odd else 1
    tau, pb = 2 * math.pi * b, math.pi * b
    qm = cmath.exp(-2j * math.pi * b * b)
    terms = []
    for m in range(n + 1):
        weight = cmath.exp(-tau * m * (even * (ts / 2 + tt + nu + 0.5j * Q) - 1j * Q))
        top = qpoch_multi([cmath.exp(2j * math.pi * b * b * (m - n - 1)),
                           cmath.exp(tau * (1j * b * (m + n) - 2 * t0 + 2 * tt)),
                           -cmath.exp(pb * (1j * b * (2 * m - 1) - 2 * t0 - ts + 2 * nu))], qm, m)
        bottom = qpoch_multi([cmath.exp(2j * math.pi * b * b * m),
                              cmath.exp(2j * math.pi * b * b * m - 4 * pb * t0),
                              cmath.exp(tau * (1j * b * m - t0 - ts + tt))], qm, m)
        terms.append(weight * top / bottom)
    return csum(terms)


def _near_limit(n: int, p: ConfluentParams, qs: QuadratureSettings, family: str, clearance: float,
                method: str, radius: float, points: int, epsilons: Sequence[float]) -> LimitValue:
    count = pinch_count(p.bp, n, clearance)
    if family == "hahn":
        target = p.with_nu(nu_limit(n, p))
        move, prefactor, label = target.with_nu, ren_prefactor_log, _NUMER_LABELS[0]
        start, closed = target.nu, hahn_limit(n, p)
    else:
        target = p.with_sigma_s(sigma_s_limit(n, p))
        move, prefactor, label = target.with_sigma_s, hat_prefactor_log, _NUMER_LABELS[2]
        start, closed = target.sigma_s, jacobi_limit(n, p)
    extraction = (ResidueExtraction(label, count),)
    offsets = limit_offsets(method, epsilons, radius, points)
    totals, remainders = [], []
    for eps in offsets:
        q = move(start + eps)
        integral, _, residues = _ck_integral(q, qs, clearance, extract=extraction)
        pref = cmath.exp(prefactor(q))
        remainders.append(pref * integral)
        totals.append(pref * (integral + csum(residues)))
        logger.debug("%s near limit n=%d eps=%s: %s", family, n, eps, totals[-1])
    value = combine_limit(method, totals, offsets)
    remainder = combine_limit(method, remainders, offsets)
    return LimitValue(value, tuple(totals), offsets, remainder, closed, count)


def hahn_near_limit(n: int, p: ConfluentParams, qs: QuadratureSettings, *,
                    clearance: float = DEFAULT_CLEARANCE, method: str = "circle",
                    radius: float = LIMIT_RADIUS, points: int = LIMIT_POINTS,
                    epsilons: Sequence[float] = LIMIT_EPSILONS) -> LimitValue:
    """C_k^ren near nu_n, the pinched downward members taken as residues; offsets as for aw_limit"""
    return _near_limit(n, p, qs, "hahn", clearance, method, radius, points, epsilons)


def jacobi_near_limit(n: int, p: ConfluentParams, qs: QuadratureSettings, *,
                      clearance: float = DEFAULT_CLEARANCE, method: str = "circle",
                      radius: float = LIMIT_RADIUS, points: int = LIMIT_POINTS,
                      epsilons: Sequence[float] = LIMIT_EPSILONS) -> LimitValue:
    """Chat_k^ren near sigma_s^{(n)}"""
    return _near_limit(n, p, qs, "jacobi", clearance, method, radius, points, epsilons)


# ---------------------------------------------------------------------------
# discretized operators

DISCRETIZED_FAMILIES = ("hahn_recurrence", "hahn_difference", "jacobi_recurrence", "jacobi_difference")


def _oriented_hahn(p: ConfluentParams) -> Tuple[complex, complex, complex, complex]:
    return tuple(p.parity.oriented(v) for v in map_confluent_to_hahn(p))


def _oriented_jacobi(p: ConfluentParams, nu: Optional[complex] = None) -> Tuple[complex, ...]:
    q = p if nu is None else p.with_nu(nu)
    return tuple(p.parity.oriented(v) for v in map_confluent_to_jacobi(q))


def hahn_scale(p: ConfluentParams) -> complex:
    """e^{(-1)^k 2 pi b (ib/2 + theta_star/2 - theta_t)}"""
    b = p.bp.b
    return cmath.exp(p.parity.sign * 2 * math.pi * b * (0.5j * b + p.theta_star / 2 - p.theta_t))


def hahn_zeta(p: ConfluentParams, sigma: complex) -> complex:
    return p.parity.oriented(cmath.exp(2 * math.pi * p.bp.b * sigma))


def jacobi_scale(p: ConfluentParams, nu: Optional[complex] = None) -> complex:
    """-e^{(-1)^{k+1} 2 pi b (theta0 - theta_t - ib/2)} X^{-2}"""
    b = p.bp.b
    x = _oriented_jacobi(p, nu)[3]
    return -cmath.exp(-p.parity.sign * 2 * math.pi * b * (p.theta0 - p.theta_t - 0.5j * b)) / (x * x)


def _jacobi_offset(p: ConfluentParams) -> complex:
    b = p.bp.b
    return 2 * cmath.cosh(2 * math.pi * b * (p.theta_t - p.theta0 + 0.5j * b))


def hahn_h_identity(p: ConfluentParams) -> float:
    """V_k(sigma_s, -theta_t) against the q-Hahn h at the mapped parameters"""
    alpha, beta, gamma, q = _oriented_hahn(p)
    lhs = v_k(p, p.bp, p.sigma_s, -p.theta_t)
    rhs = hahn_scale(p) * hahn_h(hahn_zeta(p, p.sigma_s), alpha, beta, gamma, q)
    return _relative(lhs, rhs)


def jacobi_eigen_identity(n: int, p: ConfluentParams) -> float:
    """The nu-independent part of H_{Chat^ren} at sigma_s^{(n)} against the q-Jacobi eigenvalue"""
    alpha, beta, _, x, q = _oriented_jacobi(p)
    b = p.bp.b
    lhs = (_jacobi_offset(p) + 2 * cmath.cosh(2 * math.pi * b * sigma_s_limit(n, p))) / jacobi_scale(p)
    return _relative(lhs, jacobi_eigenvalue(n, x, alpha, beta, q))


def _coefficient_gap(family: str, n: int, p: ConfluentParams) -> float:
    if family == "hahn_recurrence":
        got = build_confluent_operator(ConfluentOperator.H_REN, p).coefficients(nu_limit(n, p))
        plus, zero, minus = hahn_recurrence_op(*_oriented_hahn(p)).coefficients(n)
        want = (minus, zero, plus)
    elif family == "hahn_difference":
        scale = hahn_scale(p)
        plus, zero, minus = build_confluent_operator(ConfluentOperator.H_REN_DUAL, p).coefficients(p.sigma_s)
        got = (-minus / scale, -zero / scale - 1, -plus / scale)
        want = hahn_difference_op(*_oriented_hahn(p)).coefficients(hahn_zeta(p, p.sigma_s))
    elif family == "jacobi_recurrence":
        b = p.bp.b
        kappa = -cmath.exp(p.parity.sign * math.pi * b * (1j * b - 2 * p.theta0 - p.theta_star))
        raw = build_confluent_operator(ConfluentOperator.H_HAT_DUAL, p).coefficients(sigma_s_limit(n, p))
        got = tuple(c / kappa for c in raw)
        alpha, beta, gamma, _, q = _oriented_jacobi(p)
        want = jacobi_recurrence_op(alpha, beta, gamma, q).coefficients(n)
    else:
        lam = jacobi_scale(p)
        plus, zero, minus = build_confluent_operator(ConfluentOperator.H_HAT, p).coefficients(p.nu)
        got = (plus / lam, (zero + _jacobi_offset(p)) / lam, minus / lam)
        alpha, beta, gamma, x, q = _oriented_jacobi(p)
        want = jacobi_difference_op(alpha, beta, gamma, q).coefficients(x)
    return max(_relative(g, w) for g, w in zip(got, want))


def _value_residual(family: str, n: int, p: ConfluentParams) -> float:
    b = p.bp.b
    if family == "hahn_recurrence":
        op = hahn_recurrence_op(*_oriented_hahn(p))
        z = cmath.exp(2 * math.pi * b * p.sigma_s)
        return eigen_residual(op, lambda m: hahn_limit(m, p), n, z + 1 / z)
    if family == "jacobi_recurrence":
        alpha, beta, gamma, x, q = _oriented_jacobi(p)
        return eigen_residual(jacobi_recurrence_op(alpha, beta, gamma, q), lambda m: jacobi_limit(m, p), n, x)
    if family == "hahn_difference":
        alpha, beta, gamma, q = _oriented_hahn(p)
        h = lambda v: hahn_h(hahn_zeta(p, v), alpha, beta, gamma, q)
        h_inv = lambda v: hahn_h(1 / hahn_zeta(p, v), alpha, beta, gamma, q)
        op = ThreeTermOperator("Delta_Hn[sigma_s]", h_inv, lambda v: -h(v) - h_inv(v), h,
                               ShiftKind.ADDITIVE, step=1j * b, variable="sigma_s")
        return eigen_residual(op, lambda v: hahn_limit(n, p.with_sigma_s(v)), p.sigma_s, q ** (-n) - 1)
    alpha, beta, gamma, _, q = _oriented_jacobi(p)
    diff = jacobi_difference_op(alpha, beta, gamma, q)
    x_of = lambda v: _oriented_jacobi(p, v)[3]
    op = ThreeTermOperator("Delta_Jn[nu]", lambda v: diff.plus(x_of(v)), lambda v: diff.zero(x_of(v)),
                           lambda v: diff.minus(x_of(v)), ShiftKind.ADDITIVE, step=1j * b, variable="nu")
    return eigen_residual(op, lambda v: jacobi_limit(n, p.with_nu(v)), p.nu,
                          jacobi_eigenvalue(n, x_of(p.nu), alpha, beta, q))


def discretized_operator_check(family: str, n: int, p: ConfluentParams, layer: str = "coefficient") -> float:
    """
    ``layer="coefficient"``: renormalized operator coefficients at the
    discrete point against the polynomial operator coefficients.
    ``layer="value"``: eigen-residual of the polynomial operator on the
    sequence (or function) of closed limits.
    """
    if family not in DISCRETIZED_FAMILIES:
        raise ValueError(f"unknown family {family!r}, expected one of {DISCRETIZED_FAMILIES}")
    if layer == "coefficient":
        return _coefficient_gap(family, n, p)
    if layer == "value":
        return _value_residual(family, n, p)
    raise ValueError(f"unknown layer {layer!r}, expected 'coefficient' or 'value'")
