"""Brute-force robustness comparison of the two ciphers' key spaces.

The block-wise key space is a constant; the pixel-wise one grows with the
pixel count n.  The crossover is where 3n + n*log2(6) equals
log2(96!) + 96; above it the pixel-wise cipher has the larger space.
"""

from __future__ import annotations

import math

from .blockwise import keyspace_blockwise_bits, keyspace_blockwise_exact
from .pixelwise import keyspace_pixelwise_exact

BITS_PER_PIXEL = 3.0 + math.log2(6.0)


def crossover_real() -> float:
    """Real-valued pixel count where the two key spaces are equal."""
    return keyspace_blockwise_bits() / BITS_PER_PIXEL


def crossover_int() -> int:
    """Smallest integer n with pixel-wise key space >= block-wise.

    Decided by exact big-integer comparison, not floating point.
    """
    target = keyspace_blockwise_exact()
    n = max(1, math.floor(crossover_real()) - 1)
    while keyspace_pixelwise_exact(n) < target:
        n += 1
    return n
