"""Three-term operators"""

import pytest

from cvk.core.operators import ShiftKind, ThreeTermOperator, eigen_residual
from cvk.errors import CoefficientSingular


def test_index_operator_on_geometric_sequence():
    # 2^{n+1} + 2^{n-1} = (5/2) 2^n
    op = ThreeTermOperator("T", lambda n: 1, lambda n: 0, lambda n: 1, ShiftKind.INDEX)
    assert op.apply(lambda n: 2.0 ** n, 3) == pytest.approx(20.0)
    assert eigen_residual(op, lambda n: 2.0 ** n, 3, 2.5) == pytest.approx(0.0, abs=1e-14)


def test_additive_and_multiplicative_neighbours():
    add = ThreeTermOperator("A", lambda v: 1, lambda v: 0, lambda v: 0, ShiftKind.ADDITIVE, step=0.5j)
    assert add.neighbour(1.0, -1) == 1.0 - 0.5j
    mul = ThreeTermOperator("M", lambda v: 1, lambda v: 0, lambda v: 0, ShiftKind.MULTIPLICATIVE, step=2.0)
    assert mul.neighbour(3.0, 1) == 6.0
    assert mul.neighbour(3.0, -1) == 1.5


def test_vanishing_coefficient_skips_the_neighbour():
    calls = []

    def f(n):
        calls.append(n)
        return 1.0

    op = ThreeTermOperator("T", lambda n: 1, lambda n: 0, lambda n: 0, ShiftKind.INDEX)
    op.apply(f, 0)
    assert -1 not in calls


def test_singular_coefficient():
    op = ThreeTermOperator("T", lambda n: 1 / n, lambda n: 0, lambda n: 0, ShiftKind.INDEX)
    with pytest.raises(CoefficientSingular, match="n=0"):
        op.coefficients(0)
    inf_op = ThreeTermOperator("T", lambda n: float("inf"), lambda n: 0, lambda n: 0, ShiftKind.INDEX)
    with pytest.raises(CoefficientSingular):
        inf_op.coefficients(1)
