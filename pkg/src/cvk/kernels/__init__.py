"""Fusion kernel, its renormalization and the confluent kernels"""

from .confluent import ConfluentParams, chat_ren, ck_kernel, ck_ren
from .fusion import FusionParams, fren, fusion_kernel, m_kernel
from .parity import Parity

__all__ = ["ConfluentParams", "chat_ren", "ck_kernel", "ck_ren", "FusionParams", "fren",
           "fusion_kernel", "m_kernel", "Parity"]
