"""
Numerical building blocks: special functions, q-series, polynomial families,
three-term operators and contour quadrature.
"""

from .numerics import QuadratureSettings
from .operators import ThreeTermOperator, eigen_residual
from .qaskey import AWParams, askey_wilson, hahn, jacobi
from .qseries import phi, qpoch
from .special_functions import BParameter, gb, sb

__all__ = ["QuadratureSettings", "ThreeTermOperator", "eigen_residual", "AWParams", "askey_wilson",
           "hahn", "jacobi", "phi", "qpoch", "BParameter", "gb", "sb"]
