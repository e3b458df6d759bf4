"""
Virasoro fusion kernel F, its renormalization F_ren, the M-form used by the
confluent limits, the difference operators they diagonalize and the
Askey-Wilson limit of F_ren.

Slot convention: every coefficient helper takes the four labels in the
order they appear in the bracket [a t; inf c] of the operator it builds,
so the same helper serves F, M and F_ren with permuted labels.
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
    circle_mean,
    circle_nodes,
    crossing_counts,
    ensure_finite,
    fixed_rule_integral,
    integrate_along,
    richardson_extrapolate,
    route_contour,
)
from ..core.operators import ShiftKind, ThreeTermOperator, eigen_residual
from ..core.qaskey import AWParams, askey_wilson, aw_difference_op, aw_recurrence_op
from ..core.qseries import csum
from ..core.special_functions import BParameter, gb_log, sb_log, sb_residue
from ..errors import AssumptionViolated, DomainError

logger = logging.getLogger(__name__)

DEFAULT_CLEARANCE = 0.05          # vertical gap kept between the contour and any pole anchor
ASSUMPTION_TOL = 1e-10            # a non-degeneracy combination below this counts as zero
LIMIT_EPSILONS = (1e-2, 5e-3, 2.5e-3)
LIMIT_RADIUS = 2.5e-3             # circle around a discrete point; well inside the nearest other singularity
LIMIT_POINTS = 8
ORACLE_PANELS = 32                # fixed-rule panels per unit length, four times the default
GAP_FACTOR = 4.0                  # extraction grows until the next lattice gap exceeds this many clearances

__all__ = [
    "FusionParams", "KernelValue", "ResidueExtraction", "FusionOperator", "LimitValue",
    "conformal_dimension", "fusion_pole_data", "fusion_integrand_log", "fusion_prefactor_log",
    "fusion_kernel", "m_kernel", "renormalization_log", "renormalized_prefactor", "fren",
    "hf_plus", "hf_zero", "hf_dual_plus", "ren_c", "build_fusion_operator",
    "eigen_residual", "difference_equations", "map_fusion_to_aw", "sigma_s_limit",
    "aw_closed_form", "aw_limit", "aw_polynomial", "recurrence_coefficient_gap",
    "difference_coefficient_gap", "pinch_count", "with_crossings", "limit_offsets", "combine_limit",
]


def conformal_dimension(x: complex, bp: BParameter) -> complex:
    """Delta(x) = Q^2/4 + x^2"""
    return bp.Q ** 2 / 4.0 + complex(x) ** 2


@dataclass(frozen=True)
class FusionParams:
    """Arguments of F[theta1 theta_t; theta_inf theta0; sigma_s, sigma_t]"""
    bp: BParameter
    theta0: float
    theta_t: float
    theta1: float
    theta_inf: float
    sigma_s: complex
    sigma_t: complex

    def __post_init__(self):
        for name in ("theta0", "theta_t", "theta1", "theta_inf"):
            value = complex(getattr(self, name))
            if abs(value.imag) > 0:
                raise AssumptionViolated(f"{name} must be real, got {value}")
            object.__setattr__(self, name, float(value.real))
        object.__setattr__(self, "sigma_s", ensure_finite(self.sigma_s, "sigma_s"))
        object.__setattr__(self, "sigma_t", ensure_finite(self.sigma_t, "sigma_t"))

    @classmethod
    def create(cls, b: float, theta0: float, theta_t: float, theta1: float, theta_inf: float,
               sigma_s: complex, sigma_t: complex) -> "FusionParams":
        return cls(BParameter(b), theta0, theta_t, theta1, theta_inf, sigma_s, sigma_t)

    def with_sigma_s(self, value: complex) -> "FusionParams":
        return replace(self, sigma_s=value)

    def with_sigma_t(self, value: complex) -> "FusionParams":
        return replace(self, sigma_t=value)

    def dual_b(self) -> "FusionParams":
        return replace(self, bp=BParameter(1.0 / self.bp.b))

    def exchanged(self) -> "FusionParams":
        """(sigma_s, theta0) <-> (sigma_t, theta1)"""
        return replace(self, sigma_s=self.sigma_t, sigma_t=self.sigma_s,
                       theta0=self.theta1, theta1=self.theta0)

    def check_aw_assumption(self, sigma_s: Optional[complex] = None) -> None:
        """Non-degeneracy needed by the Askey-Wilson limit; raises AssumptionViolated"""
        if self.bp.root_of_unity:
            raise AssumptionViolated(f"b^2 = {self.bp.b ** 2:.12g} makes q a low-order root of unity")
        ss = self.sigma_s if sigma_s is None else complex(sigma_s)
        checks = [("sigma_s", ss), ("sigma_t", self.sigma_t),
                  ("theta1", self.theta1), ("theta0", self.theta0)]
        for e in (1, -1):
            for e2 in (1, -1):
                checks.append((f"theta_inf-theta_t{e:+d}sigma_s{e2:+d}sigma_t",
                               self.theta_inf - self.theta_t + e * ss + e2 * self.sigma_t))
                checks.append((f"theta_inf+theta_t{e:+d}theta0{e2:+d}theta1",
                               self.theta_inf + self.theta_t + e * self.theta0 + e2 * self.theta1))
        for name, value in checks:
            if abs(value) < ASSUMPTION_TOL:
                raise AssumptionViolated(f"{name} vanishes ({value})")


@dataclass(frozen=True)
class KernelValue:
    value: complex
    quadrature_err: float
    residue_terms: int = 0

    def __post_init__(self):
        if not self.quadrature_err >= 0:
            raise ValueError(f"quadrature_err must be >= 0, got {self.quadrature_err}")

    def scaled(self, factor: complex) -> "KernelValue":
        return KernelValue(self.value * factor, self.quadrature_err * abs(factor), self.residue_terms)


@dataclass(frozen=True)
class ResidueExtraction:
    """The ``count`` members nearest the anchor of a named sequence, taken as
    residues so the contour may pass on their far side"""
    label: str
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"extraction count must be >= 1, got {self.count}")


def with_crossings(extract: Sequence[ResidueExtraction], counts: Dict[str, int]) -> Tuple[ResidueExtraction, ...]:
    """Requested extractions merged with crossing_counts output, the larger count winning per label"""
    merged = {ex.label: ex.count for ex in extract}
    for label, count in counts.items():
        merged[label] = max(merged.get(label, 0), count)
    return tuple(ResidueExtraction(label, count) for label, count in merged.items())


# ---------------------------------------------------------------------------
# pole data and integrand

def _shifts(p: FusionParams) -> Tuple[List[complex], List[complex]]:
    half = 0.5j * p.bp.Q
    numer = [p.theta1, -p.theta1, p.theta0 + p.theta_inf + p.theta_t, -p.theta0 + p.theta_inf + p.theta_t]
    denom = [half + p.theta_inf + p.sigma_s, half + p.theta_inf - p.sigma_s,
             half + p.theta_t + p.sigma_t, half + p.theta_t - p.sigma_t]
    return [complex(v) for v in numer], [complex(v) for v in denom]


# upward label -> index of the denominator s_b whose zeros generate it
_UPWARD = {
    "-theta_inf-sigma_s": 0,
    "-theta_inf+sigma_s": 1,
    "-theta_t-sigma_t": 2,
    "-theta_t+sigma_t": 3,
}


def fusion_pole_data(p: FusionParams) -> Tuple[List[PoleSequence], List[PoleSequence]]:
    """Four upward and four downward pole sequences of the F integrand"""
    b, binv, half = p.bp.b, 1.0 / p.bp.b, 0.5j * p.bp.Q
    up = Orientation.UPWARD
    down = Orientation.DOWNWARD
    upward = [
        PoleSequence(-p.theta_inf + p.sigma_s, up, b, binv, "-theta_inf+sigma_s"),
        PoleSequence(-p.theta_inf - p.sigma_s, up, b, binv, "-theta_inf-sigma_s"),
        PoleSequence(-p.theta_t + p.sigma_t, up, b, binv, "-theta_t+sigma_t"),
        PoleSequence(-p.theta_t - p.sigma_t, up, b, binv, "-theta_t-sigma_t"),
    ]
    downward = [
        PoleSequence(p.theta1 - half, down, b, binv, "theta1-iQ/2"),
        PoleSequence(-p.theta1 - half, down, b, binv, "-theta1-iQ/2"),
        PoleSequence(p.theta0 - p.theta_inf - p.theta_t - half, down, b, binv, "theta0-theta_inf-theta_t-iQ/2"),
        PoleSequence(-p.theta0 - p.theta_inf - p.theta_t - half, down, b, binv, "-theta0-theta_inf-theta_t-iQ/2"),
    ]
    return upward, downward


def fusion_integrand_log(x, p: FusionParams) -> np.ndarray:
    """ln of the s_b ratio under the F integral; vectorized in x"""
    numer, denom = _shifts(p)
    x = np.asarray(x, dtype=complex)
    args = x[..., None] + np.array(numer + denom)
    weights = np.array([1.0] * 4 + [-1.0] * 4)
    return np.sum(sb_log(args, p.bp) * weights, axis=-1)


def fusion_prefactor_log(p: FusionParams) -> complex:
    """ln of the g_b prefactor of F"""
    t0, tt, t1, ti = p.theta0, p.theta_t, p.theta1, p.theta_inf
    ss, st, half = p.sigma_s, p.sigma_t, 0.5j * p.bp.Q
    numer, denom = [], []
    for e in (1, -1):
        for e2 in (1, -1):
            numer += [e * t1 + tt + e2 * st, e * t0 - ti + e2 * st]
            denom += [e * t0 + tt + e2 * ss, e * t1 - ti + e2 * ss]
        numer.append(half + 2 * e * ss)
        denom.append(-half + 2 * e * st)
    return complex(np.sum(gb_log(np.array(numer), p.bp)) - np.sum(gb_log(np.array(denom), p.bp)))


def _extract(p: FusionParams, upward: List[PoleSequence], downward: List[PoleSequence],
             extract: Sequence[ResidueExtraction]) -> List[complex]:
    """Pull out residues; edits the routing lists in place and returns 2 pi i Res terms"""
    numer, denom = _shifts(p)
    terms = []
    for ex in extract:
        if ex.label not in _UPWARD:
            raise ValueError(f"unknown upward sequence {ex.label!r}, expected one of {sorted(_UPWARD)}")
        index = next(i for i, s in enumerate(upward) if s.label == ex.label)
        seq = upward[index]
        lattice = seq.lattice(ex.count + 1)
        upward[index] = seq.shifted(1j * lattice[-1][0])
        own = _UPWARD[ex.label]
        others_num = np.array(numer)
        others_den = np.array([d for i, d in enumerate(denom) if i != own])
        for offset, m, l in lattice[:-1]:
            pole = seq.member(offset)
            downward.append(PoleSequence(pole, Orientation.DOWNWARD, seq.step_b, seq.step_binv,
                                         f"{ex.label}[{m},{l}]"))
            rest = np.sum(sb_log(pole + others_num, p.bp)) - np.sum(sb_log(pole + others_den, p.bp))
            # 1/s_b(w) = s_b(-w) near the zero w = iQ/2 + i(m b + l/b)
            residue = -sb_residue(m, l, p.bp) * complex(np.exp(rest))
            terms.append(ensure_finite(2j * math.pi * residue, f"residue at {pole}"))
            logger.debug("extracted pole %s (%d, %d) of %s", pole, m, l, ex.label)
    return terms


def fusion_kernel(p: FusionParams, qs: QuadratureSettings, *, clearance: float = DEFAULT_CLEARANCE,
                  strip: Optional[Tuple[float, float]] = None,
                  extract: Sequence[ResidueExtraction] = (), rule: str = "adaptive") -> KernelValue:
    """
    Evaluate F by routed contour quadrature.

    ``extract`` names upward members whose residues are added explicitly,
    the continuation used when a parameter drags them under the downward
    sequences. ``rule="fixed"`` switches to the dense Gauss-Legendre oracle.
    """
    integral, err, residues = _fusion_integral(p, qs, clearance, strip, extract, rule)
    pref = complex(np.exp(fusion_prefactor_log(p)))
    value = pref * (integral + csum(residues))
    return KernelValue(ensure_finite(value, "F"), err * abs(pref), len(residues))


def _fusion_integral(p: FusionParams, qs: QuadratureSettings, clearance: float = DEFAULT_CLEARANCE,
                     strip: Optional[Tuple[float, float]] = None,
                     extract: Sequence[ResidueExtraction] = (),
                     rule: str = "adaptive") -> Tuple[complex, float, List[complex]]:
    """(contour integral, error estimate, 2 pi i Res terms) of the F integrand"""
    upward, downward = fusion_pole_data(p)
    extract = with_crossings(extract, crossing_counts(upward, downward, clearance, Orientation.UPWARD))
    residues = _extract(p, upward, downward, extract)
    band = strip if strip is not None else (-p.bp.Q / 2.0, 0.0)
    path = route_contour(upward, downward, band, clearance)
    settings = qs.with_decay(2.0 * math.pi * p.bp.Q)
    if rule == "adaptive":
        integral, err = integrate_along(lambda x: np.exp(fusion_integrand_log(x, p)), path, settings)
    elif rule == "fixed":
        integral = fixed_rule_integral(lambda x: np.exp(fusion_integrand_log(x, p)), path, settings,
                                       panels_per_unit=ORACLE_PANELS)
        err = 0.0
    else:
        raise ValueError(f"unknown rule {rule!r}, expected 'adaptive' or 'fixed'")
    return integral, err, residues


def m_kernel(p: FusionParams, qs: QuadratureSettings, **kwargs) -> KernelValue:
    """
    M[theta0 theta_t; theta_inf theta1; sigma_t, sigma_s], read with p's own labels:
    e^{i pi (Delta(sigma_t) - Delta(theta1) - Delta(theta_t))} times F with the
    slots theta1 <-> theta0 and sigma_s <-> sigma_t exchanged.
    """
    bp = p.bp
    phase = cmath.exp(1j * math.pi * (conformal_dimension(p.sigma_t, bp) - conformal_dimension(p.theta1, bp)
                                      - conformal_dimension(p.theta_t, bp)))
    return fusion_kernel(p.exchanged(), qs, **kwargs).scaled(phase)


# ---------------------------------------------------------------------------
# renormalization

def renormalization_log(p: FusionParams) -> complex:
    """ln N, the factor taking F to the symmetric F_ren"""
    t0, tt, t1, ti = p.theta0, p.theta_t, p.theta1, p.theta_inf
    ss, st, half = p.sigma_s, p.sigma_t, 0.5j * p.bp.Q
    k_args = [half + 2 * tt, half + t0 + t1 + ti + tt, half + t0 + t1 - ti + tt]
    numer = [-2 * st - half, 2 * st - half]
    denom = [-2 * ss + half, 2 * ss + half]
    for e in (1, -1):
        for e2 in (1, -1):
            numer += [-tt + e * t0 + e2 * ss, -t1 + e * ti + e2 * ss]
            denom += [t0 + e * ti + e2 * st, tt + e * t1 + e2 * st]
    log_k = np.sum(sb_log(np.array(k_args), p.bp))
    return complex(log_k + np.sum(gb_log(np.array(numer), p.bp)) - np.sum(gb_log(np.array(denom), p.bp)))


def renormalized_prefactor(p: FusionParams) -> complex:
    """
    N times the F prefactor in its reduced s_b form:
    K prod_e s_b(e sigma_t - theta0 - theta_inf) prod_{e,e'} s_b(e sigma_s + e' theta0 - theta_t)
    / prod_e s_b(e sigma_s + theta1 - theta_inf).
    """
    t0, tt, t1, ti = p.theta0, p.theta_t, p.theta1, p.theta_inf
    ss, st, half = p.sigma_s, p.sigma_t, 0.5j * p.bp.Q
    numer = [half + 2 * tt, half + t0 + t1 + ti + tt, half + t0 + t1 - ti + tt]
    denom = []
    for e in (1, -1):
        numer.append(e * st - t0 - ti)
        denom.append(e * ss + t1 - ti)
        for e2 in (1, -1):
            numer.append(e * ss + e2 * t0 - tt)
    return complex(np.exp(np.sum(sb_log(np.array(numer), p.bp)) - np.sum(sb_log(np.array(denom), p.bp))))


def fren(p: FusionParams, qs: QuadratureSettings, **kwargs) -> KernelValue:
    """F_ren = N F; keyword arguments as for fusion_kernel"""
    integral, err, residues = _fusion_integral(p, qs, **kwargs)
    pref = complex(np.exp(renormalization_log(p) + fusion_prefactor_log(p)))
    value = pref * (integral + csum(residues))
    return KernelValue(ensure_finite(value, "F_ren"), err * abs(pref), len(residues))


# ---------------------------------------------------------------------------
# difference operators

def _gamma_ratio(numer: Sequence[complex], denom: Sequence[complex]) -> complex:
    with np.errstate(all="ignore"):
        log = np.sum(loggamma(np.array(numer, dtype=complex))) - np.sum(loggamma(np.array(denom, dtype=complex)))
        return complex(4.0 * math.pi ** 2 * np.exp(log))


def hf_plus(a: float, t: float, inf: float, c: float, bp: BParameter, sigma: complex) -> complex:
    """H_F^+[a t; inf c; b, sigma]"""
    b = bp.b
    ibs = 1j * b * sigma
    numer = [1 + 2 * b * b - 2 * ibs, b * b - 2 * ibs, -2 * ibs, 1 + b * b - 2 * ibs]
    denom = [b * bp.Q / 2 - 1j * b * (sigma + e * a + e2 * inf) for e in (1, -1) for e2 in (1, -1)]
    denom += [b * bp.Q / 2 - 1j * b * (sigma + e * c + e2 * t) for e in (1, -1) for e2 in (1, -1)]
    return _gamma_ratio(numer, denom)


def hf_dual_plus(a: float, t: float, inf: float, c: float, bp: BParameter, sigma: complex) -> complex:
    """Htilde_F^+[a t; inf c; b, sigma]"""
    b = bp.b
    ibs = 1j * b * sigma
    numer = [1 - b * b + 2 * ibs, 1 + 2 * ibs, 2 * ibs - 2 * b * b, 2 * ibs - b * b]
    half = (1 - b * b) / 2
    denom = [half + 1j * b * (sigma + e * a + e2 * inf) for e in (1, -1) for e2 in (1, -1)]
    denom += [half + 1j * b * (sigma + e * c + e2 * t) for e in (1, -1) for e2 in (1, -1)]
    return _gamma_ratio(numer, denom)


def hf_zero(a: float, t: float, inf: float, c: float, bp: BParameter, sigma: complex) -> complex:
    """H_F^0[a t; inf c; b, sigma]"""
    b = bp.b
    pb = math.pi * b
    total = -2 * cmath.cosh(2 * pb * (a + t + 0.5j * b))
    for k in (1, -1):
        numer = 1.0 + 0.0j
        for e in (1, -1):
            numer *= cmath.cosh(pb * (e * inf - 0.5j * b - a - k * sigma))
            numer *= cmath.cosh(pb * (e * c - 0.5j * b - t - k * sigma))
        total += 4 * numer / (cmath.sinh(2 * pb * (k * sigma + 0.5j * b)) * cmath.sinh(2 * pb * k * sigma))
    return total


def ren_c(a: float, t: float, inf: float, c: float, bp: BParameter, sigma: complex) -> complex:
    """C[a t; inf c; b, sigma], the shift coefficient of H_ren"""
    b = bp.b
    pb = math.pi * b
    numer = 4.0 + 0.0j
    for e in (1, -1):
        numer *= cmath.cosh(pb * (-0.5j * b - t + sigma + e * c))
        numer *= cmath.cosh(pb * (-0.5j * b - a + sigma + e * inf))
    return numer / (cmath.sinh(2 * pb * sigma) * cmath.sinh(pb * (-2 * sigma + 1j * b)))


class FusionOperator(Enum):
    H_F = "H_F"                  # on sigma_s, labels [theta1 theta_t; theta_inf theta0]
    H_F_DUAL = "H~_F"            # on sigma_t, labels [theta0 theta_t; theta_inf theta1]
    H_M = "H_M"                  # on M's sigma_t
    H_M_DUAL = "H~_M"            # on M's sigma_s
    H_REN = "H_ren"              # on sigma_s
    H_REN_DUAL = "H_ren~"        # H_ren with labels [theta0 theta_t; theta_inf theta1] on sigma_t


def build_fusion_operator(name, p: FusionParams, step: str = "b") -> ThreeTermOperator:
    """
    Three-term operator with additive shift i*step in the variable it acts on.
    step "binv" rebuilds every coefficient with b -> 1/b.
    """
    kind = FusionOperator(name) if not isinstance(name, FusionOperator) else name
    if step == "b":
        bp = p.bp
    elif step == "binv":
        bp = BParameter(1.0 / p.bp.b)
    else:
        raise ValueError(f"unknown step {step!r}, expected 'b' or 'binv'")
    direct = (p.theta1, p.theta_t, p.theta_inf, p.theta0)
    swapped = (p.theta0, p.theta_t, p.theta_inf, p.theta1)
    s = bp.b

    if kind is FusionOperator.H_F:
        labels, plus_fn, variable = direct, hf_plus, "sigma_s"
    elif kind is FusionOperator.H_F_DUAL:
        labels, plus_fn, variable = swapped, hf_dual_plus, "sigma_t"
    elif kind is FusionOperator.H_M:
        labels, variable = swapped, "sigma_t"

        def plus_fn(a, t, inf, c, bq, sigma):
            return cmath.exp(2 * math.pi * s * (sigma + 0.5j * s)) * hf_plus(a, t, inf, c, bq, sigma)
    elif kind is FusionOperator.H_M_DUAL:
        labels, plus_fn, variable = direct, hf_dual_plus, "sigma_s"
    elif kind is FusionOperator.H_REN:
        labels, variable = direct, "sigma_s"
    else:
        labels, variable = swapped, "sigma_t"

    if kind in (FusionOperator.H_REN, FusionOperator.H_REN_DUAL):
        def plus(v):
            return ren_c(*labels, bp, -v)

        def minus(v):
            return ren_c(*labels, bp, v)
    else:
        def plus(v):
            return plus_fn(*labels, bp, v)

        def minus(v):
            return plus_fn(*labels, bp, -v)

    def zero(v):
        return hf_zero(*labels, bp, v)

    return ThreeTermOperator(f"{kind.value}[{step}]", plus, zero, minus, ShiftKind.ADDITIVE,
                             step=1j * s, variable=variable)


def _as_function(evaluate: Callable[[FusionParams], KernelValue], p: FusionParams,
                 variable: str) -> Callable[[complex], complex]:
    if variable == "sigma_s":
        return lambda v: evaluate(p.with_sigma_s(v)).value
    return lambda v: evaluate(p.with_sigma_t(v)).value


def difference_equations(p: FusionParams, qs: QuadratureSettings, family: str = "F",
                         **kwargs) -> List[Tuple[str, float]]:
    """
    Residuals of the four eigen-equations of F, M or F_ren at p.

    For M the labels of p are M's labels. The b and 1/b copies differ only in
    the coefficient set and the eigenvalue 2cosh(2 pi b^{+-1} sigma).
    """
    if family == "F":
        evaluate = lambda q: fusion_kernel(q, qs, **kwargs)
        pairs = [(FusionOperator.H_F, "sigma_t"), (FusionOperator.H_F_DUAL, "sigma_s")]
    elif family == "M":
        evaluate = lambda q: m_kernel(q, qs, **kwargs)
        pairs = [(FusionOperator.H_M, "sigma_s"), (FusionOperator.H_M_DUAL, "sigma_t")]
    elif family == "ren":
        evaluate = lambda q: fren(q, qs, **kwargs)
        pairs = [(FusionOperator.H_REN, "sigma_t"), (FusionOperator.H_REN_DUAL, "sigma_s")]
    else:
        raise ValueError(f"unknown kernel family {family!r}, expected 'F', 'M' or 'ren'")
    out = []
    for kind, spectral in pairs:
        for step in ("b", "binv"):
            op = build_fusion_operator(kind, p, step)
            s = p.bp.b if step == "b" else 1.0 / p.bp.b
            eigen = 2 * cmath.cosh(2 * math.pi * s * getattr(p, spectral))
            point = getattr(p, op.variable)
            residual = eigen_residual(op, _as_function(evaluate, p, op.variable), point, eigen)
            logger.debug("%s residual %.3e at %s=%s", op.name, residual, op.variable, point)
            out.append((op.name, residual))
    return out


# ---------------------------------------------------------------------------
# Askey-Wilson limit

def map_fusion_to_aw(p: FusionParams) -> AWParams:
    """alpha, beta, gamma, delta and q = e^{2 i pi b^2} from the four thetas"""
    b = p.bp.b
    ex = lambda u: -cmath.exp(2 * math.pi * b * (0.5j * b + u))
    return AWParams(alpha=ex(p.theta1 + p.theta_t), beta=ex(p.theta0 - p.theta_inf),
                    gamma=ex(-p.theta1 + p.theta_t), delta=ex(p.theta0 + p.theta_inf), q=p.bp.q)


def sigma_s_limit(n: int, p: FusionParams) -> complex:
    """sigma_s^{(n)} = iQ/2 + theta0 + theta_t + i b n"""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return 0.5j * p.bp.Q + p.theta0 + p.theta_t + 1j * p.bp.b * n


def aw_closed_form(p: FusionParams) -> complex:
    """
    Prefactor times the x_f residue at sigma_s^{(0)}, with the zero of the
    prefactor and the pole of the residue cancelled by hand. Equals 1.
    """
    t0, tt, t1, ti = p.theta0, p.theta_t, p.theta1, p.theta_inf
    half = 0.5j * p.bp.Q
    ss = sigma_s_limit(0, p)
    numer = [half + 2 * tt, half + t0 + t1 + ti + tt, half + t0 + t1 - ti + tt,
             ss + t0 - tt, -ss + t0 - tt,
             -2 * t0 - half, -t0 - t1 - ti - tt - half, -t0 + t1 - ti - tt - half]
    denom = [ss + t1 - ti, -ss + t1 - ti]
    return complex(np.exp(np.sum(sb_log(np.array(numer), p.bp)) - np.sum(sb_log(np.array(denom), p.bp))))


def pinch_count(bp: BParameter, n: int, clearance: float) -> int:
    """Lowest members of an upward lattice at anchor 0 lying within n b, grown across close gaps"""
    seq = PoleSequence(0j, Orientation.UPWARD, bp.b, 1.0 / bp.b)
    lattice = seq.lattice(4 * (n + 2) ** 2)
    depth = n * bp.b
    count = sum(1 for offset, _, _ in lattice if offset <= depth + 1e-9)
    while count < len(lattice) - 1 and lattice[count][0] - lattice[count - 1][0] < GAP_FACTOR * clearance:
        count += 1
    return count


@dataclass(frozen=True)
class LimitValue:
    """Limit value with the offset samples it came from"""
    value: complex
    samples: Tuple[complex, ...]
    epsilons: Tuple[complex, ...]
    remainder: complex = 0j                # limit of the contour-integral part alone
    closed_form: Optional[complex] = None
    residue_terms: int = 0


def limit_offsets(method: str, epsilons: Sequence[float], radius: float, points: int) -> Tuple[complex, ...]:
    """Offsets from the discrete point at which the kernel is sampled"""
    if method == "circle":
        return tuple(complex(e) for e in circle_nodes(radius, points))
    if method == "richardson":
        return tuple(complex(e) for e in epsilons)
    raise ValueError(f"unknown limit method {method!r}, expected 'circle' or 'richardson'")


def combine_limit(method: str, samples: Sequence[complex], offsets: Sequence[complex]) -> complex:
    """
    Centre value from the samples. The kernel is analytic across the discrete
    point, so the circle mean converges geometrically in the number of points;
    Richardson assumes a power series in the real offset.
    """
    if method == "circle":
        return circle_mean(samples)
    ratio = abs(offsets[0] / offsets[1]) if len(offsets) > 1 else 2.0
    value, _ = richardson_extrapolate(samples, ratio)
    return value


def aw_limit(n: int, p: FusionParams, qs: QuadratureSettings, *, clearance: float = DEFAULT_CLEARANCE,
             method: str = "circle", radius: float = LIMIT_RADIUS, points: int = LIMIT_POINTS,
             epsilons: Sequence[float] = LIMIT_EPSILONS, n_max: int = 3) -> LimitValue:
    """
    lim F_ren as sigma_s -> sigma_s^{(n)}.

    F_ren is sampled at sigma_s^{(n)} + eps, either on a circle of ``radius``
    (method "circle") or at the real ``epsilons`` (method "richardson"). The
    pinched members of the -theta_inf-sigma_s sequence are extracted as
    residues before routing.
    """
    if n > n_max:
        raise DomainError(f"n = {n} exceeds n_max = {n_max}")
    target = sigma_s_limit(n, p)
    p.check_aw_assumption(sigma_s=target)
    count = pinch_count(p.bp, n, clearance)
    extraction = (ResidueExtraction("-theta_inf-sigma_s", count),)
    offsets = limit_offsets(method, epsilons, radius, points)
    totals, remainders = [], []
    for eps in offsets:
        q = p.with_sigma_s(target + eps)
        integral, _, residues = _fusion_integral(q, qs, clearance, extract=extraction)
        pref = complex(np.exp(renormalization_log(q) + fusion_prefactor_log(q)))
        remainders.append(pref * integral)
        totals.append(pref * (integral + csum(residues)))
        logger.debug("F_ren at sigma_s^(%d) + %s: %s", n, eps, totals[-1])
    value = combine_limit(method, totals, offsets)
    remainder = combine_limit(method, remainders, offsets)
    closed = aw_closed_form(p) if n == 0 else None
    return LimitValue(value, tuple(totals), offsets, remainder, closed, count)


def aw_polynomial(n: int, p: FusionParams) -> complex:
    """A_n(e^{2 pi b sigma_t}) under the fusion-to-Askey-Wilson correspondence"""
    return askey_wilson(n, cmath.exp(2 * math.pi * p.bp.b * p.sigma_t), map_fusion_to_aw(p))


def recurrence_coefficient_gap(n: int, p: FusionParams) -> float:
    """Largest |H_ren coefficient at sigma_s^{(n)} - R_{A_n} coefficient|"""
    op = build_fusion_operator(FusionOperator.H_REN, p)
    target = aw_recurrence_op(map_fusion_to_aw(p))
    got = op.coefficients(sigma_s_limit(n, p))
    want = target.coefficients(n)
    return max(abs(g - w) for g, w in zip(got, want))


def difference_coefficient_gap(p: FusionParams) -> float:
    """
    Largest coefficient gap between -e^{2 pi b (ib/2 + theta0 + theta_t)} times
    the dual H_ren at sigma_t and Delta_{A_n} at z = e^{2 pi b sigma_t}.
    """
    b = p.bp.b
    scale = -cmath.exp(2 * math.pi * b * (0.5j * b + p.theta0 + p.theta_t))
    op = build_fusion_operator(FusionOperator.H_REN_DUAL, p)
    target = aw_difference_op(map_fusion_to_aw(p))
    got = [scale * c for c in op.coefficients(p.sigma_t)]
    want = target.coefficients(cmath.exp(2 * math.pi * b * p.sigma_t))
    return max(abs(g - w) for g, w in zip(got, want))
