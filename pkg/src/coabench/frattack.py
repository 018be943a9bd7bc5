"""Feature reconstruction attack: keyless leading-bit normalization.

For every channel value, if bit L-1 disagrees with the target leading bit
b, the low L bits are complemented.  With L=8 this undoes a conditional
intensity complement up to one bit of information, which is why it
recovers edge structure from pixel-wise encrypted images.  It reads no
key material.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .images import check_image


@dataclass(frozen=True)
class FRParams:
    bits: int = 8  # L, number of low bits considered
    leading_bit: int = 1  # b, target value of bit L-1

    def __post_init__(self):
        if not 1 <= self.bits <= 8:
            raise InvalidParams(f"bits must be in [1,8], got {self.bits}")
        if self.leading_bit not in (0, 1):
            raise InvalidParams(f"leading_bit must be 0 or 1, got {self.leading_bit}")


def fr_attack(img_e: np.ndarray, params: FRParams = FRParams()) -> np.ndarray:
    check_image(img_e)
    lead = (img_e >> (params.bits - 1)) & 1
    mask = np.uint8((1 << params.bits) - 1)
    return np.where(lead != params.leading_bit, img_e ^ mask, img_e)


def fr_attack_sweep(img_e: np.ndarray, bits: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Both leading-bit variants; the caller scores each and keeps the best."""
    return (
        fr_attack(img_e, FRParams(bits, 0)),
        fr_attack(img_e, FRParams(bits, 1)),
    )
