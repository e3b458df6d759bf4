"""Generic three-term difference and recurrence operators"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Tuple

from ..errors import CoefficientSingular


class ShiftKind(Enum):
    INDEX = "index"                    # n -> n +- 1
    ADDITIVE = "additive"              # v -> v +- step (step = i b or i/b)
    MULTIPLICATIVE = "multiplicative"  # v -> v * step^{+-1} (step = q)


@dataclass(frozen=True)
class ThreeTermOperator:
    """
    (O f)(v) = plus(v) f(v+) + zero(v) f(v) + minus(v) f(v-)

    where v+- is v +- 1, v +- step or v * step^{+-1} depending on ``shift``.
    """
    name: str
    plus: Callable[[Any], complex]
    zero: Callable[[Any], complex]
    minus: Callable[[Any], complex]
    shift: ShiftKind
    step: complex = 1
    variable: str = "n"

    def neighbour(self, v, direction: int):
        if self.shift is ShiftKind.INDEX:
            return v + direction
        if self.shift is ShiftKind.ADDITIVE:
            return v + direction * self.step
        return v * self.step ** direction

    def coefficients(self, v) -> Tuple[complex, complex, complex]:
        try:
            values = (complex(self.plus(v)), complex(self.zero(v)), complex(self.minus(v)))
        except (ZeroDivisionError, OverflowError) as exc:
            raise CoefficientSingular(f"{self.name} coefficient singular at {self.variable}={v}: {exc}") from exc
        for value in values:
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise CoefficientSingular(f"{self.name} coefficient not finite at {self.variable}={v}")
        return values

    def apply(self, f: Callable[[Any], complex], v) -> complex:
        """Apply to f at v; a vanishing shift coefficient skips its evaluation"""
        plus, zero, minus = self.coefficients(v)
        total = zero * f(v)
        if plus != 0:
            total += plus * f(self.neighbour(v, +1))
        if minus != 0:
            total += minus * f(self.neighbour(v, -1))
        return total


def eigen_residual(op: ThreeTermOperator, f: Callable[[Any], complex], point, eigenvalue: complex) -> float:
    """|O f - lambda f| / max(1, |lambda f|) at the point"""
    applied = op.apply(f, point)
    target = eigenvalue * f(point)
    return abs(applied - target) / max(1.0, abs(target))
