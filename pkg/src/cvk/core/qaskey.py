"""
Askey-Wilson, continuous dual q-Hahn and big q-Jacobi polynomials with
their recurrence and difference operators.

Polynomials are summed directly as terminating series, never through the
recurrence, so the recurrence checks stay independent.
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass

from ..errors import SingularPoint
from .operators import ShiftKind, ThreeTermOperator
from .qseries import QValue, phi, qpoch_multi

logger = logging.getLogger(__name__)

SINGULAR_BALL = 1e-8      # excluded radius around singular points of difference operators


@dataclass(frozen=True)
class AWParams:
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    q: complex

    def guard(self, degree: int) -> None:
        QValue(self.q).check(max(degree, 1) * 2 + 2)


def _avoid(points, z: complex, name: str) -> None:
    for p in points:
        if abs(z - p) < SINGULAR_BALL:
            raise SingularPoint(f"{name} is singular at z={z} (within {SINGULAR_BALL} of {p})")


# ---------------------------------------------------------------------------
# Askey-Wilson

def askey_wilson(n: int, z: complex, p: AWParams) -> complex:
    """A_n(z) = 4phi3(q^-n, abcd q^{n-1}, a z, a/z; ab, ac, ad | q; q)"""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if z == 0:
        raise SingularPoint("askey_wilson needs z != 0")
    if n == 0:
        return 1.0 + 0.0j
    a, b, c, d, q = p.alpha, p.beta, p.gamma, p.delta, p.q
    p.guard(n)
    return phi([q ** (-n), a * b * c * d * q ** (n - 1), a * z, a / z],
               [a * b, a * c, a * d], q, q)


def aw_recurrence_op(p: AWParams) -> ThreeTermOperator:
    """R_{A_n}: eigenvalue z + 1/z on the sequence n -> A_n(z)"""
    a, b, c, d, q = p.alpha, p.beta, p.gamma, p.delta, p.q
    abcd = a * b * c * d

    def plus(n):
        return ((1 - a * b * q ** n) * (1 - a * c * q ** n) * (1 - a * d * q ** n) * (1 - abcd * q ** (n - 1))
                / (a * (1 - abcd * q ** (2 * n - 1)) * (1 - abcd * q ** (2 * n))))

    def minus(n):
        return (a * (1 - q ** n) * (1 - b * c * q ** (n - 1)) * (1 - b * d * q ** (n - 1)) * (1 - c * d * q ** (n - 1))
                / ((1 - abcd * q ** (2 * n - 2)) * (1 - abcd * q ** (2 * n - 1))))

    def zero(n):
        return a + 1 / a - plus(n) - minus(n)

    return ThreeTermOperator("R_An", plus, zero, minus, ShiftKind.INDEX)


def aw_difference_op(p: AWParams) -> ThreeTermOperator:
    """Delta_{A_n} in z with shifts z -> q^{+-1} z; eigenvalue q^-n + abcd q^{n-1}"""
    a, b, c, d, q = p.alpha, p.beta, p.gamma, p.delta, p.q
    root = cmath.sqrt(q)

    def check(z):
        _avoid([1, -1, root, -root, 1 / root, -1 / root], z, "Delta_An")

    def plus(z):
        check(z)
        return (1 - a * z) * (1 - b * z) * (1 - c * z) * (1 - d * z) / ((1 - z * z) * (1 - q * z * z))

    def minus(z):
        check(z)
        return (a - z) * (b - z) * (c - z) * (d - z) / ((1 - z * z) * (q - z * z))

    def zero(z):
        return 1 + a * b * c * d / q - plus(z) - minus(z)

    return ThreeTermOperator("Delta_An", plus, zero, minus, ShiftKind.MULTIPLICATIVE, step=q, variable="z")


def aw_eigenvalue(n: int, p: AWParams) -> complex:
    return p.q ** (-n) + p.alpha * p.beta * p.gamma * p.delta * p.q ** (n - 1)


def standard_normalization(n: int, x: complex, p: AWParams) -> complex:
    """p_n(x) = a^-n (ab, ac, ad; q)_n A_n(z) with x = (z + 1/z)/2"""
    z = x + cmath.sqrt(x * x - 1)
    if z == 0:
        z = x - cmath.sqrt(x * x - 1)
    a = p.alpha
    return a ** (-n) * qpoch_multi([a * p.beta, a * p.gamma, a * p.delta], p.q, n) * askey_wilson(n, z, p)


# ---------------------------------------------------------------------------
# continuous dual q-Hahn

def hahn(n: int, z: complex, alpha: complex, beta: complex, gamma: complex, q: complex) -> complex:
    """H_n(z) = 3phi2(q^-n, a z, a/z; ab, ac | q; q), the delta = 0 Askey-Wilson"""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if z == 0:
        raise SingularPoint("hahn needs z != 0")
    if n == 0:
        return 1.0 + 0.0j
    QValue(q).check(2 * n + 2)
    return phi([q ** (-n), alpha * z, alpha / z], [alpha * beta, alpha * gamma], q, q)


def hahn_recurrence_op(alpha: complex, beta: complex, gamma: complex, q: complex) -> ThreeTermOperator:
    """R_{H_n}: eigenvalue z + 1/z"""
    def plus(n):
        return (1 - alpha * beta * q ** n) * (1 - alpha * gamma * q ** n) / alpha

    def minus(n):
        return alpha * (1 - q ** n) * (1 - beta * gamma * q ** (n - 1))

    def zero(n):
        return alpha + 1 / alpha - plus(n) - minus(n)

    return ThreeTermOperator("R_Hn", plus, zero, minus, ShiftKind.INDEX)


def hahn_h(z: complex, alpha: complex, beta: complex, gamma: complex, q: complex) -> complex:
    """h(z) = (1 - a z)(1 - b z)(1 - c z) / ((1 - z^2)(1 - q z^2))"""
    return (1 - alpha * z) * (1 - beta * z) * (1 - gamma * z) / ((1 - z * z) * (1 - q * z * z))


def hahn_difference_op(alpha: complex, beta: complex, gamma: complex, q: complex) -> ThreeTermOperator:
    """Delta_{H_n}: h(z) f(qz) + h(1/z) f(z/q) - (h(z) + h(1/z)) f; eigenvalue q^-n - 1"""
    root = cmath.sqrt(q)

    def check(z):
        _avoid([1, -1, root, -root, 1 / root, -1 / root, 0], z, "Delta_Hn")

    def plus(z):
        check(z)
        return hahn_h(z, alpha, beta, gamma, q)

    def minus(z):
        check(z)
        return hahn_h(1 / z, alpha, beta, gamma, q)

    def zero(z):
        return -plus(z) - minus(z)

    return ThreeTermOperator("Delta_Hn", plus, zero, minus, ShiftKind.MULTIPLICATIVE, step=q, variable="z")


# ---------------------------------------------------------------------------
# big q-Jacobi

def jacobi(n: int, x: complex, alpha: complex, beta: complex, gamma: complex, q: complex) -> complex:
    """J_n(x) = 3phi2(q^-n, ab q^{n+1}, x; a q, c q | q; q)"""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return 1.0 + 0.0j
    QValue(q).check(2 * n + 2)
    return phi([q ** (-n), alpha * beta * q ** (n + 1), x], [alpha * q, gamma * q], q, q)


def jacobi_recurrence_op(alpha: complex, beta: complex, gamma: complex, q: complex) -> ThreeTermOperator:
    """R_{J_n}: c+ T_{n+1} + (1 - c+ - c-) + c- T_{n-1}, eigenvalue x"""
    ab = alpha * beta

    def plus(n):
        return ((1 - alpha * q ** (n + 1)) * (1 - ab * q ** (n + 1)) * (1 - gamma * q ** (n + 1))
                / ((1 - ab * q ** (2 * n + 1)) * (1 - ab * q ** (2 * n + 2))))

    def minus(n):
        return (-alpha * gamma * q ** (n + 1) * (1 - q ** n) * (1 - ab / gamma * q ** n) * (1 - beta * q ** n)
                / ((1 - ab * q ** (2 * n)) * (1 - ab * q ** (2 * n + 1))))

    def zero(n):
        return 1 - plus(n) - minus(n)

    return ThreeTermOperator("R_Jn", plus, zero, minus, ShiftKind.INDEX)


def jacobi_difference_op(alpha: complex, beta: complex, gamma: complex, q: complex) -> ThreeTermOperator:
    """Delta_{J_n}: d+ f(qx) - (d+ + d-) f + d- f(x/q)"""
    def plus(x):
        return alpha * q * (x - 1) * (beta * x - gamma)

    def minus(x):
        return (x - alpha * q) * (x - gamma * q)

    def zero(x):
        return -plus(x) - minus(x)

    return ThreeTermOperator("Delta_Jn", plus, zero, minus, ShiftKind.MULTIPLICATIVE, step=q, variable="x")


def jacobi_eigenvalue(n: int, x: complex, alpha: complex, beta: complex, q: complex) -> complex:
    """q^-n (1 - q^n)(1 - ab q^{n+1}) x^2"""
    return q ** (-n) * (1 - q ** n) * (1 - alpha * beta * q ** (n + 1)) * x * x
