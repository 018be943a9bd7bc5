"""Keyed deterministic random streams.

Every piece of cipher key material in this package is expanded from a
64-bit seed through SplitMix64: a counter-like generator whose state
advances by a fixed odd constant per draw and whose output is a bijective
mixing of the state.  It is tiny, portable and bit-exact on every
platform, which is what makes experiment reports reproducible from their
recorded seeds.  It is *not* cryptographically secure and is not meant to
be; the harness evaluates the visual security of the image ciphers, not
of the stream behind their keys.
"""

from __future__ import annotations

from .errors import InvalidBound

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO64 = 1 << 64


def mix64(state: int) -> int:
    """SplitMix64 output function applied to a single state value."""
    z = state & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return (z ^ (z >> 31)) & MASK64


class KeyStream:
    """Mutable cursor over the SplitMix64 sequence of one seed.

    Single-owner: a stream must not be shared between threads.  Two
    streams with the same seed yield identical draws in any process.
    """

    __slots__ = ("state", "origin_seed")

    def __init__(self, seed: int):
        self.origin_seed = seed & MASK64
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def next_bit(self) -> int:
        """Most significant bit of the next draw."""
        return self.next_u64() >> 63

    def next_bounded(self, m: int) -> int:
        """Unbiased integer in [0, m) via rejection sampling."""
        if m < 1:
            raise InvalidBound(f"bound must be >= 1, got {m}")
        limit = _TWO64 - (_TWO64 % m)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % m

    def permutation(self, k: int) -> list[int]:
        """Fisher-Yates permutation of {0, ..., k-1} drawn from the stream."""
        if k < 1:
            raise InvalidBound(f"permutation size must be >= 1, got {k}")
        p = list(range(k))
        for i in range(k - 1, 0, -1):
            j = self.next_bounded(i + 1)
            p[i], p[j] = p[j], p[i]
        return p


# Bulk variants below delegate to the kernel backend.  Each is equivalent
# to constructing a fresh KeyStream(seed) and taking n scalar draws; the
# tests assert that equivalence.


def u64s_from_seed(seed: int, n: int):
    from . import kernels

    return kernels.sm64_u64s(seed, n)


def bits_from_seed(seed: int, n: int):
    from . import kernels

    return kernels.sm64_bits(seed, n)


def bounded_from_seed(seed: int, n: int, m: int):
    from . import kernels

    return kernels.sm64_bounded(seed, n, m)


def perm_from_seed(seed: int, k: int):
    from . import kernels

    return kernels.sm64_perm(seed, k)
