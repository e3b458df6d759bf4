"""Everything the confluent family reads from the index k"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Parity:
    k: int

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def sign(self) -> int:
        """(-1)^k"""
        return -1 if self.k % 2 else 1

    @property
    def odd(self) -> bool:
        return self.k % 2 == 1

    @property
    def half(self) -> int:
        """floor(k/2)"""
        return self.k // 2

    @property
    def half_prev(self) -> int:
        """floor((k-1)/2)"""
        return (self.k - 1) // 2

    @property
    def shift(self) -> float:
        """floor(k/2) - 1/2"""
        return self.half - 0.5

    @property
    def branch(self) -> float:
        """Argument added to b in (e^{2 i pi (floor(k/2) - 1/2)} b)^alpha"""
        return 2.0 * math.pi * self.shift

    @property
    def base(self) -> int:
        """1 or 2, the representative the renormalized kernels reduce to"""
        return 1 if self.odd else 2

    def oriented(self, value: complex) -> complex:
        """value^{(-1)^k}"""
        return 1.0 / value if self.odd else value
