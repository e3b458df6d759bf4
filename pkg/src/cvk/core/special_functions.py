"""
Double sine s_b and hyperbolic gamma g_b.

Both functions are evaluated from their defining y/t integrals inside a
narrow strip around the real axis and continued to the whole plane by the
functional equations

    s_b(z + i s/2) / s_b(z - i s/2) = 2 cosh(pi s z)
    g_b(z + i s/2) / g_b(z - i s/2) = s^{-i s z} sqrt(2 pi) / Gamma(1/2 - i s z)

for the two steps s = b and s = 1/b. The vectorized ``sb_log``/``gb_log``
work on numpy arrays and return logarithms (defined modulo 2 pi i); the
scalar ``sb``/``gb`` add zero and pole detection on the lattices.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import exp1, loggamma

from ..errors import DomainError, MultiplePole
from .qseries import qpoch, root_of_unity_order

logger = logging.getLogger(__name__)

LATTICE_TOL = 1e-10            # lattice membership, in lattice coordinates
ROOT_OF_UNITY_DEGREE = 64      # |q^m - 1| checked for m <= this
ASYMPTOTIC_REACH = 6.0         # |Re z| > ASYMPTOTIC_REACH * max(b, 1/b) uses the asymptotic form
TAIL_EXPONENT = 44.0           # upper cutoff Y with e^{-decay * Y} = e^{-44}
GL_ORDER = 16                  # Gauss-Legendre points per panel
SERIES_ORDER = 12              # power series order near the removable singularity
CHUNK = 128                    # z values per vectorized block

DEFAULT_ORDER = ("b", "binv")


@dataclass(frozen=True)
class BParameter:
    """Coupling b with Q = b + 1/b, central charge and the two q parameters"""
    b: float
    Q: float = field(init=False)
    c: float = field(init=False)
    q: complex = field(init=False)
    q_tilde: complex = field(init=False)
    root_of_unity: bool = field(init=False)

    def __post_init__(self):
        b = float(self.b)
        if not b > 0 or not math.isfinite(b):
            raise DomainError(f"b must be positive and finite, got {self.b}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "Q", b + 1.0 / b)
        object.__setattr__(self, "c", 1.0 + 6.0 * (b + 1.0 / b) ** 2)
        object.__setattr__(self, "q", complex(np.exp(2j * np.pi * b * b)))
        object.__setattr__(self, "q_tilde", complex(np.exp(2j * np.pi / (b * b))))
        order = root_of_unity_order(self.q, ROOT_OF_UNITY_DEGREE)
        object.__setattr__(self, "root_of_unity", order is not None)
        if order is not None:
            logger.warning("b=%s gives q=e^{2 i pi b^2} of order %d; lattice poles may collide", b, order)

    @property
    def small(self) -> float:
        """min(b, 1/b)"""
        return min(self.b, 1.0 / self.b)

    @property
    def large(self) -> float:
        """max(b, 1/b)"""
        return max(self.b, 1.0 / self.b)

    def step(self, name: str) -> float:
        if name == "b":
            return self.b
        if name == "binv":
            return 1.0 / self.b
        raise ValueError(f"unknown step {name!r}, expected 'b' or 'binv'")


class ValueKind(Enum):
    FINITE = "finite"
    POLE = "pole"


@dataclass(frozen=True)
class SpecialValue:
    """
    Value of a meromorphic function at a point.

    A finite value on the zero lattice is reported as 0 with ``order`` equal
    to the multiplicity of the zero; a pole carries its order and no value.
    """
    kind: ValueKind
    value: Optional[complex] = None
    order: int = 0

    def __post_init__(self):
        if self.kind is ValueKind.POLE and self.order < 1:
            raise ValueError("pole order must be >= 1")

    @property
    def is_pole(self) -> bool:
        return self.kind is ValueKind.POLE

    def finite(self) -> complex:
        if self.is_pole:
            raise DomainError(f"pole of order {self.order} has no finite value")
        return self.value


# ---------------------------------------------------------------------------
# lattice bookkeeping

def lattice_multiplicity(w: complex, bp: BParameter, tol: float = LATTICE_TOL) -> int:
    """Number of (m, l) >= 0 with w = i(m b + l/b) within tol"""
    w = complex(w)
    if abs(w.real) > tol:
        return 0
    y = w.imag
    if y < -tol:
        return 0
    count = 0
    for m in range(int(math.floor(y / bp.b + tol)) + 1):
        l_coord = (y - m * bp.b) * bp.b
        l_int = round(l_coord)
        if l_int >= 0 and abs(l_coord - l_int) < tol:
            count += 1
    return count


def sb_zero_order(z: complex, bp: BParameter) -> int:
    """Multiplicity of z on the zero lattice iQ/2 + i m b + i l/b"""
    return lattice_multiplicity(complex(z) - 0.5j * bp.Q, bp)


def sb_pole_order(z: complex, bp: BParameter) -> int:
    """Multiplicity of z on the pole lattice -iQ/2 - i m b - i l/b"""
    return lattice_multiplicity(-complex(z) - 0.5j * bp.Q, bp)


# ---------------------------------------------------------------------------
# quadrature rules

@lru_cache(maxsize=64)
def _panel_rule(lo: float, hi: float, n_panels: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(GL_ORDER)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _rule_for(bp: BParameter, z: np.ndarray, decay: float) -> Tuple[float, float, int]:
    """Series cutoff, upper limit and panel count for the block z"""
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    rmax = float(np.max(np.abs(z.real))) if z.size else 0.0
    lo = 0.05 * bp.small
    halvings = math.ceil(math.log2(lo * (1.0 + 2.0 * zmax) / 0.5))
    lo = lo / 2 ** max(0, halvings)
    hi = 4.0 * math.ceil(TAIL_EXPONENT / decay / 4.0)
    width = min(1.0, 6.0 / (2.0 * rmax + bp.Q))
    n_panels = 1 << max(0, math.ceil(math.log2((hi - lo) / width)))
    return lo, hi, n_panels


def _series_quotient(num: list, den: list) -> list:
    """Coefficients of num/den as power series, den[0] scalar nonzero"""
    out = []
    for j in range(len(num)):
        acc = num[j]
        for i in range(1, j + 1):
            if i < len(den):
                acc = acc - den[i] * out[j - i]
        out.append(acc / den[0])
    return out


def _sinh_product_series(bp: BParameter) -> list:
    """Coefficients D with 4 sinh(b t) sinh(t/b) = t^2 * sum_j D_j t^j"""
    d = bp.b - 1.0 / bp.b
    coeffs = []
    for j in range(SERIES_ORDER + 1):
        if j % 2:
            coeffs.append(0.0)
        else:
            p = j + 2
            coeffs.append(2.0 * (bp.Q ** p - d ** p) / math.factorial(p))
    return coeffs


def _sb_series_head(z: np.ndarray, bp: BParameter, y0: float) -> np.ndarray:
    """Integral over [0, y0] of the s_b integrand from its even power series"""
    sin_coeffs = []
    for j in range(SERIES_ORDER + 1):
        if j % 2:
            sin_coeffs.append(np.zeros_like(z))
        else:
            k = j // 2
            sin_coeffs.append(2.0 * (-1) ** k * (2.0 * z) ** (2 * k + 1) / math.factorial(2 * k + 1))
    r = _series_quotient(sin_coeffs, _sinh_product_series(bp))
    total = np.zeros_like(z)
    for m in range(SERIES_ORDER - 1):
        total = total + r[m + 2] * y0 ** (m + 1) / (m + 1)
    return total


def _gb_series_head(z: np.ndarray, bp: BParameter, t0: float) -> np.ndarray:
    """Integral over [0, t0] of the g_b integrand from its power series"""
    exp_coeffs = [(2j * z) ** (j + 1) / math.factorial(j + 1) for j in range(SERIES_ORDER + 1)]
    r = _series_quotient(exp_coeffs, _sinh_product_series(bp))
    e = [((-2.0 * bp.b) ** j + (-2.0 / bp.b) ** j) / math.factorial(j) for j in range(SERIES_ORDER + 1)]
    total = np.zeros_like(z)
    for m in range(SERIES_ORDER - 1):
        coeff = r[m + 2] + 0.25 * z * z * e[m + 1]
        total = total + coeff * t0 ** (m + 1) / (m + 1)
    return total


def _sb_log_quad(z: np.ndarray, bp: BParameter) -> np.ndarray:
    """ln s_b from the defining integral, |Im z| < Q/2"""
    out = np.empty_like(z)
    for start in range(0, z.size, CHUNK):
        block = z[start:start + CHUNK]
        decay = bp.Q - 2.0 * float(np.max(np.abs(block.imag)))
        lo, hi, n_panels = _rule_for(bp, block, decay)
        y, w = _panel_rule(lo, hi, n_panels)
        kern = 0.5 / (np.sinh(y / bp.b) * np.sinh(bp.b * y))
        zz = block[:, None]
        integrand = (np.sin(2.0 * y[None, :] * zz) * kern[None, :] - zz / y[None, :]) / y[None, :]
        body = integrand @ w
        total = _sb_series_head(block, bp, lo) + body - block / hi
        out[start:start + CHUNK] = 1j * total
    return out


def _gb_log_quad(z: np.ndarray, bp: BParameter) -> np.ndarray:
    """ln g_b from the defining integral, Im z > -Q/2"""
    out = np.empty_like(z)
    for start in range(0, z.size, CHUNK):
        block = z[start:start + CHUNK]
        decay = min(bp.Q, bp.Q + 2.0 * float(np.min(block.imag)))
        lo, hi, n_panels = _rule_for(bp, block, decay)
        t, w = _panel_rule(lo, hi, n_panels)
        kern = 0.25 / (np.sinh(bp.b * t) * np.sinh(t / bp.b))
        damp = np.exp(-2.0 * bp.b * t) + np.exp(-2.0 * t / bp.b)
        zz = block[:, None]
        tt = t[None, :]
        integrand = ((np.exp(2j * zz * tt) - 1.0) * kern[None, :]
                     + 0.25 * zz * zz * damp[None, :] - 0.5j * zz / tt) / tt
        body = integrand @ w
        tail = 0.25 * block * block * (exp1(2.0 * bp.b * hi) + exp1(2.0 * hi / bp.b)) - 0.5j * block / hi
        out[start:start + CHUNK] = _gb_series_head(block, bp, lo) + body + tail
    return out


# ---------------------------------------------------------------------------
# continuation

def _log2cosh(u: np.ndarray) -> np.ndarray:
    sign = np.where(u.real >= 0, 1.0, -1.0)
    v = sign * u
    return v + np.log1p(np.exp(-2.0 * v))


def _gb_step_log(z: np.ndarray, s: float) -> np.ndarray:
    """ln g_b(z + i s/2) - ln g_b(z - i s/2)"""
    return -1j * s * z * math.log(s) + 0.5 * math.log(2.0 * math.pi) - loggamma(0.5 - 1j * s * z)


def _reduce(w: np.ndarray, bp: BParameter, order: Sequence[str], kind: str) -> Tuple[np.ndarray, np.ndarray]:
    """Shift w into |Im w| <= min(b,1/b)/2, returning (log factor, reduced w)"""
    acc = np.zeros_like(w)
    steps = [bp.step(name) for name in order] + [bp.small]
    for s in steps:
        n = np.rint(w.imag / s).astype(int)
        if not np.any(n):
            continue
        for j in range(int(np.max(np.abs(n)))):
            down = n > j
            up = -n > j
            if kind == "sb":
                acc = acc + np.where(down, _log2cosh(np.pi * s * (w - 1j * j * s - 0.5j * s)), 0.0)
                acc = acc - np.where(up, _log2cosh(np.pi * s * (w + 1j * j * s + 0.5j * s)), 0.0)
            else:
                acc = acc + np.where(down, _gb_step_log(w - 1j * j * s - 0.5j * s, s), 0.0)
                acc = acc - np.where(up, _gb_step_log(w + 1j * j * s + 0.5j * s, s), 0.0)
        w = w - 1j * n * s
    return acc, w


def sb_log(z, bp: BParameter, order: Sequence[str] = DEFAULT_ORDER) -> np.ndarray:
    """
    Vectorized ln s_b(z), modulo 2 pi i.

    The argument is shifted into the narrow strip first, then evaluated by
    the asymptotic form when |Re z| is large and by quadrature otherwise.
    Points on the zero or pole lattice give -inf/inf real parts.
    """
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    flat = arr.ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        acc, w = _reduce(flat.copy(), bp, order, "sb")
    far = np.abs(w.real) > ASYMPTOTIC_REACH * bp.large
    strip = np.empty_like(w)
    if np.any(far):
        strip[far] = sb_asymptotic(w[far], bp, np.sign(w[far].real))
    if np.any(~far):
        strip[~far] = _sb_log_quad(w[~far], bp)
    result = (acc + strip).reshape(arr.shape)
    return result if np.ndim(z) else result[0]


def gb_log(z, bp: BParameter, order: Sequence[str] = DEFAULT_ORDER) -> np.ndarray:
    """Vectorized ln g_b(z), modulo 2 pi i"""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    flat = arr.ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        acc, w = _reduce(flat.copy(), bp, order, "gb")
    result = (acc + _gb_log_quad(w, bp)).reshape(arr.shape)
    return result if np.ndim(z) else result[0]


# ---------------------------------------------------------------------------
# public scalar API

def sb_integral(z: complex, bp: BParameter) -> complex:
    """s_b(z) straight from the defining integral, valid for |Im z| < Q/2"""
    z = complex(z)
    if abs(z.imag) >= bp.Q / 2:
        raise DomainError(f"|Im z| = {abs(z.imag):.6g} outside the strip |Im z| < Q/2 = {bp.Q / 2:.6g}")
    return complex(np.exp(_sb_log_quad(np.array([z]), bp)[0]))


def gb_integral(z: complex, bp: BParameter) -> complex:
    """g_b(z) straight from the defining integral, valid for Im z > -Q/2"""
    z = complex(z)
    if z.imag <= -bp.Q / 2:
        raise DomainError(f"Im z = {z.imag:.6g} outside the half plane Im z > -Q/2 = {-bp.Q / 2:.6g}")
    return complex(np.exp(_gb_log_quad(np.array([z]), bp)[0]))


def sb(z: complex, bp: BParameter, order: Sequence[str] = DEFAULT_ORDER) -> SpecialValue:
    z = complex(z)
    zeros = sb_zero_order(z, bp)
    if zeros:
        return SpecialValue(ValueKind.FINITE, 0j, zeros)
    poles = sb_pole_order(z, bp)
    if poles:
        return SpecialValue(ValueKind.POLE, None, poles)
    return SpecialValue(ValueKind.FINITE, complex(np.exp(sb_log(z, bp, order))), 0)


def gb(z: complex, bp: BParameter, order: Sequence[str] = DEFAULT_ORDER) -> SpecialValue:
    z = complex(z)
    poles = lattice_multiplicity(-z - 0.5j * bp.Q, bp)
    if poles:
        return SpecialValue(ValueKind.POLE, None, poles)
    return SpecialValue(ValueKind.FINITE, complex(np.exp(gb_log(z, bp, order))), 0)


def sb_from_gb(z: complex, bp: BParameter) -> complex:
    """s_b(z) = g_b(z) / g_b(-z)"""
    return complex(np.exp(gb_log(z, bp) - gb_log(-complex(z), bp)))


def sb_asymptotic(z, bp: BParameter, direction):
    """
    Predicted ln s_b(z) for Re z -> direction * infinity:
    +-ln s_b(z) = -i pi z^2/2 - i pi (b^2 + b^-2)/24.
    """
    const = 1j * np.pi * (bp.b ** 2 + bp.b ** -2) / 24.0
    return -np.asarray(direction) * (0.5j * np.pi * np.asarray(z) ** 2 + const)


def sb_shift(x: complex, m: int, l: int, bp: BParameter) -> complex:
    """
    s_b(x + i m b + i l/b) / s_b(x) from the q-Pochhammer closed forms,
    first the m steps of size b, then the l steps of size 1/b.
    """
    x = complex(x)
    first = _shift_factor(x, m, bp.b)
    second = _shift_factor(x + 1j * m * bp.b, l, 1.0 / bp.b)
    return first * second


def _shift_factor(x: complex, m: int, s: float) -> complex:
    """s_b(x + i m s)/s_b(x) for either step s in {b, 1/b}"""
    if m == 0:
        return 1.0 + 0.0j
    if m < 0:
        return 1.0 / _shift_factor(x + 1j * m * s, -m, s)
    pref = np.exp(0.5j * np.pi * s * s * m * m + np.pi * s * m * x)
    return complex(pref * qpoch(-np.exp(-1j * np.pi * s * s - 2.0 * np.pi * s * x),
                                np.exp(-2j * np.pi * s * s), m))


def sb_pole(m: int, l: int, bp: BParameter) -> complex:
    """Pole location -iQ/2 - i m b - i l/b"""
    return -0.5j * bp.Q - 1j * m * bp.b - 1j * l / bp.b


def sb_residue(m: int, l: int, bp: BParameter) -> complex:
    """Residue of s_b at -iQ/2 - i m b - i l/b, from Res_{-iQ/2} s_b = i/(2 pi)"""
    if m < 0 or l < 0:
        raise ValueError(f"lattice indices must be >= 0, got ({m}, {l})")
    point = sb_pole(m, l, bp)
    if sb_pole_order(point, bp) > 1:
        raise MultiplePole(f"b^2={bp.b ** 2} rational: pole at ({m}, {l}) is not simple")
    return 0.5j / math.pi / sb_shift(point, m, l, bp)
