"""Pixel-wise image cipher.

Encryption runs per pixel: a keyed conditional intensity complement on
each of the three color channels, then a keyed shuffle of the pixel's
color components (one of the 6 permutations).  Keys are four 64-bit
seeds; a key policy decides whether one key covers the whole dataset or
every image gets its own derived key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidPermIndex
from .images import check_image
from .prng import GAMMA, MASK64, KeyStream

# row k lists the source channel feeding each output slot, lexicographic
COLOR_PERMS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))


@dataclass(frozen=True)
class PixelwiseKey:
    """Four independent 64-bit seeds: one per color channel complement
    stream, one for the color-shuffle stream."""

    seed_r: int
    seed_g: int
    seed_b: int
    seed_cs: int

    def to_json(self) -> dict:
        return {
            "seed_r": self.seed_r,
            "seed_g": self.seed_g,
            "seed_b": self.seed_b,
            "seed_cs": self.seed_cs,
        }

    @classmethod
    def from_json(cls, d: dict) -> "PixelwiseKey":
        return cls(d["seed_r"], d["seed_g"], d["seed_b"], d["seed_cs"])


def np_transform(p: int, bit: int) -> int:
    """Conditional intensity complement of one channel value."""
    return 255 - p if bit else p


def shuffle_colors(pixel, perm_index: int):
    """Apply one of the 6 color permutations to an (R,G,B) triple."""
    if not 0 <= perm_index < 6:
        raise InvalidPermIndex(f"perm_index must be in [0,6), got {perm_index}")
    src = COLOR_PERMS[perm_index]
    return (pixel[src[0]], pixel[src[1]], pixel[src[2]])


def expand_np_bits(key: PixelwiseKey, width: int, height: int) -> np.ndarray:
    """Three complement bit-planes, shape (height, width, 3).

    Plane c is drawn from that channel's seed in row-major pixel order,
    one bit per pixel per channel.
    """
    n = width * height
    planes = np.empty((height, width, 3), dtype=np.uint8)
    for c, seed in enumerate((key.seed_r, key.seed_g, key.seed_b)):
        planes[:, :, c] = kernels.sm64_bits(seed, n).reshape(height, width)
    return planes


def expand_perm_indices(key: PixelwiseKey, width: int, height: int) -> np.ndarray:
    """Per-pixel color-shuffle selector in [0,6), row-major, shape (height, width)."""
    n = width * height
    return kernels.sm64_bounded(key.seed_cs, n, 6).astype(np.uint8).reshape(height, width)


def encrypt_pixelwise(img: np.ndarray, key: PixelwiseKey) -> np.ndarray:
    check_image(img)
    h, w = img.shape[:2]
    flips = expand_np_bits(key, w, h).reshape(-1, 3)
    idx = expand_perm_indices(key, w, h).reshape(-1)
    out = kernels.pixelwise_apply(img.reshape(-1, 3), flips, idx, False)
    return out.reshape(h, w, 3)


def decrypt_pixelwise(img: np.ndarray, key: PixelwiseKey) -> np.ndarray:
    """Exact inverse of encrypt_pixelwise under the same key."""
    check_image(img)
    h, w = img.shape[:2]
    flips = expand_np_bits(key, w, h).reshape(-1, 3)
    idx = expand_perm_indices(key, w, h).reshape(-1)
    out = kernels.pixelwise_apply(img.reshape(-1, 3), flips, idx, True)
    return out.reshape(h, w, 3)


def derive_image_key(master: int, index: int) -> PixelwiseKey:
    """Per-image key for the different-keys policy.

    The stream seed is the master seed advanced by (index+1) state
    increments, so keys for distinct indices come from disjoint stream
    positions without storing one seed per image.
    """
    if index < 0:
        raise ValueError(f"index must be >= 0, got {index}")
    stream = KeyStream((master + GAMMA * (index + 1)) & MASK64)
    return PixelwiseKey(*(stream.next_u64() for _ in range(4)))


@dataclass(frozen=True)
class KeyPolicy:
    """Same key for every image, or one derived key per image index."""

    mode: str  # "same" | "different"
    key: PixelwiseKey | None = None
    master: int | None = None

    def __post_init__(self):
        if self.mode == "same":
            if self.key is None:
                raise ValueError("same-key policy needs a key")
        elif self.mode == "different":
            if self.master is None:
                raise ValueError("different-keys policy needs a master seed")
        else:
            raise ValueError(f"unknown key policy {self.mode!r}")

    @classmethod
    def same_key(cls, key: PixelwiseKey) -> "KeyPolicy":
        return cls("same", key=key)

    @classmethod
    def different_keys(cls, master: int) -> "KeyPolicy":
        return cls("different", master=master)

    def key_for(self, index: int) -> PixelwiseKey:
        if self.mode == "same":
            return self.key
        return derive_image_key(self.master, index)

    def to_json(self) -> dict:
        if self.mode == "same":
            return {"mode": "same", "key": self.key.to_json()}
        return {"mode": "different", "master": self.master}


def keyspace_pixelwise_exact(n: int) -> int:
    """Exact number of distinct keys for an n-pixel image: 2^(3n) * 6^n."""
    if n < 1:
        raise ValueError(f"pixel count must be >= 1, got {n}")
    return 2 ** (3 * n) * 6**n


def keyspace_pixelwise_bits(n: int) -> float:
    """log2 of the pixel-wise key space: 3n + n*log2(6)."""
    if n < 1:
        raise ValueError(f"pixel count must be >= 1, got {n}")
    return 3.0 * n + n * math.log2(6.0)
