"""
cvk: Virasoro fusion kernels, their confluent limits and the q-Askey
polynomials they degenerate to.
"""

__version__ = "1.0.0"

from .core.special_functions import BParameter, gb, sb
from .errors import CvkError
from .kernels.confluent import ConfluentParams, chat_ren, ck_kernel, ck_ren
from .kernels.fusion import FusionParams, fren, fusion_kernel

__all__ = [
    "BParameter",
    "ConfluentParams",
    "CvkError",
    "FusionParams",
    "chat_ren",
    "ck_kernel",
    "ck_ren",
    "fren",
    "fusion_kernel",
    "gb",
    "sb",
]
