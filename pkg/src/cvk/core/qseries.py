"""
q-Pochhammer symbols, terminating basic hypergeometric series and the two
finite sums that the polynomial limits of the confluent kernels reduce to.

All sums run in the literal order m = 0..n and are accumulated with
compensated summation, so identity checks compare literal formulas.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from ..errors import DenominatorVanishes, NonTerminating

logger = logging.getLogger(__name__)

TERMINATION_TOL = 1e-10        # |a q^n - 1| below this marks a = q^{-n}
TERMINATION_SEARCH = 512       # largest n searched for termination
VANISHING_TOL = 1e-14          # |1 - b q^k| below this is a vanishing factor
NONTERMINATING_MAX_TERMS = 20000
ROOT_OF_UNITY_TOL = 1e-12


def csum(values: Iterable[complex]) -> complex:
    """Compensated sum of complex numbers, real and imaginary parts separately"""
    items = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in items), math.fsum(v.imag for v in items))


@dataclass(frozen=True)
class QValue:
    """Deformation parameter with an optional root-of-unity guard"""
    q: complex
    root_of_unity_guard: bool = True

    def __post_init__(self):
        if self.q == 0:
            raise ValueError("q must be nonzero")

    def check(self, length: int) -> None:
        """Raise DenominatorVanishes if q^m = 1 for some 1 <= m <= length"""
        if not self.root_of_unity_guard:
            return
        order = root_of_unity_order(self.q, length)
        if order is not None:
            raise DenominatorVanishes(
                f"q={self.q} is a root of unity of order {order} within series length {length}")


def root_of_unity_order(q: complex, max_order: int, tol: float = ROOT_OF_UNITY_TOL) -> Optional[int]:
    """Smallest m <= max_order with |q^m - 1| < tol, or None"""
    powers = np.asarray(q, dtype=complex) ** np.arange(1, max_order + 1)
    hits = np.nonzero(np.abs(powers - 1.0) < tol)[0]
    return int(hits[0]) + 1 if hits.size else None


def qpoch(a: complex, q: complex, n: int) -> complex:
    """(a; q)_n = prod_{k=0}^{n-1} (1 - a q^k) for n >= 0"""
    if n < 0:
        raise ValueError(f"qpoch needs n >= 0, got {n}")
    if n == 0:
        return 1.0 + 0.0j
    factors = 1.0 - complex(a) * np.asarray(q, dtype=complex) ** np.arange(n)
    return complex(np.prod(factors))


def qpoch_multi(args: Sequence[complex], q: complex, n: int) -> complex:
    """(a_1, ..., a_r; q)_n as the product of the single symbols"""
    result = 1.0 + 0.0j
    for a in args:
        result *= qpoch(a, q, n)
    return result


def termination_index(numer: Sequence[complex], q: complex) -> Optional[int]:
    """
    Index n at which the series terminates: a numerator equals q^{-n}.

    Each numerator is tested for n <= TERMINATION_SEARCH and the first
    vanishing factor ends the series. When q is a root of unity a numerator
    matches n, n + order, ...; only the smallest match counts.
    """
    powers = np.asarray(q, dtype=complex) ** np.arange(TERMINATION_SEARCH + 1)
    best = None
    for a in numer:
        hits = np.nonzero(np.abs(complex(a) * powers - 1.0) < TERMINATION_TOL)[0]
        if hits.size:
            n = int(hits[0])
            best = n if best is None else min(best, n)
    return best


def _phi_terms(numer: Sequence[complex], denom: Sequence[complex], q: complex,
               z: complex, count: int) -> List[complex]:
    terms = [1.0 + 0.0j]
    term = 1.0 + 0.0j
    for k in range(count):
        qk = q ** k
        lower = [1.0 - b * qk for b in denom] + [1.0 - q ** (k + 1)]
        for value, b in zip(lower, list(denom) + [q]):
            if abs(value) < VANISHING_TOL:
                raise DenominatorVanishes(f"({b}; q)_{k + 1} vanishes before termination")
        upper = 1.0 + 0.0j
        for a in numer:
            upper *= 1.0 - a * qk
        term = term * upper * z / np.prod(lower)
        terms.append(complex(term))
    return terms


def phi(numer: Sequence[complex], denom: Sequence[complex], q: complex, z: complex) -> complex:
    """
    Basic hypergeometric series r_phi_s(numer; denom | q; z).

    The series is summed to its termination index when a numerator equals
    q^{-n}. Otherwise it is summed only when |q| < 1 and |z| < 1; any other
    non-terminating case raises NonTerminating.
    """
    numer = [complex(a) for a in numer]
    denom = [complex(b) for b in denom]
    q = complex(q)
    z = complex(z)
    n = termination_index(numer, q)
    if n is not None:
        QValue(q).check(n)
        return csum(_phi_terms(numer, denom, q, z, n))
    if abs(q) < 1 and abs(z) < 1:
        terms = [1.0 + 0.0j]
        term = 1.0 + 0.0j
        for k in range(NONTERMINATING_MAX_TERMS):
            qk = q ** k
            lower = np.prod([1.0 - b * qk for b in denom]) * (1.0 - q ** (k + 1))
            if abs(lower) < VANISHING_TOL:
                raise DenominatorVanishes(f"lower parameters vanish at k={k + 1}")
            term = term * np.prod([1.0 - a * qk for a in numer]) * z / lower
            terms.append(complex(term))
            if abs(term) < 1e-17 * abs(terms[0]):
                return csum(terms)
        raise NonTerminating(f"series did not converge in {NONTERMINATING_MAX_TERMS} terms")
    raise NonTerminating(
        f"no numerator of the form q^-n (tol {TERMINATION_TOL}) and |q|={abs(q):.3g}, |z|={abs(z):.3g}")


def _delta(k: int, j: int) -> int:
    return 1 if k == j else 0


def sigma_hahn(n: int, k: int, alpha: complex, beta: complex, gamma: complex,
               z: complex, q: complex) -> complex:
    """
    Literal finite sum attached to the continuous dual q-Hahn limit.

    For k = 2 it equals 3phi2(q^-n, gamma z, gamma/z; beta gamma, alpha gamma | q; q),
    for k = 1 the same series with argument alpha beta q^n.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    terms = []
    for m in range(n + 1):
        num = qpoch_multi([q ** (1 - m) / q ** (-n), q ** (1 - m) / (gamma * z),
                           q ** (1 - m) / (gamma / z)], q, m)
        den = qpoch_multi([q ** (1 - m) / q, q ** (1 - m) / (beta * gamma),
                           q ** (1 - m) / (alpha * gamma)], q, m)
        if abs(den) < VANISHING_TOL:
            raise DenominatorVanishes(f"lower symbols vanish at m={m}")
        weight = (alpha * beta) ** (-m) * q ** (-m * n)
        if k == 1:
            weight *= (alpha * beta) ** m * q ** (m * (n - 1))
        terms.append(weight * num / den)
    return csum(terms)


def sigma_jacobi(n: int, k: int, alpha: complex, beta: complex, gamma: complex,
                 x: complex, q: complex) -> complex:
    """
    Literal finite sum attached to the big q-Jacobi limit.

    For k = 2 it equals J_n(x; alpha, beta, gamma; q), for k = 1 it equals
    J_n(1/x; 1/alpha, 1/beta, 1/gamma; 1/q).
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    terms = []
    for m in range(n + 1):
        num = qpoch_multi([q ** (-m + n + 1), q ** (-m - n) / (alpha * beta),
                           q ** (1 - m) / x], q, m)
        den = qpoch_multi([q ** (-m) / alpha, q ** (-m) / gamma, q ** (-m)], q, m)
        if abs(den) < VANISHING_TOL:
            raise DenominatorVanishes(f"lower symbols vanish at m={m}")
        weight = q ** (-m) * (x * beta / gamma) ** (m * _delta(k, 2))
        terms.append(weight * num / den)
    return csum(terms)
