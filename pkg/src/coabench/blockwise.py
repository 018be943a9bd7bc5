"""Block-wise image cipher on 4x4 blocks of nibbles.

Each 8-bit channel value splits into upper and lower 4-bit halves, giving
6 nibble channels per block (96 positions).  A keyed bit mask reverses
intensities (v -> 15-v) and a keyed permutation shuffles the 96
positions; the same mask and permutation apply to every block of every
image encrypted under a key.  That sharing is what makes the scheme
learnable from plain/cipher pairs: in nibble space it is one fixed signed
permutation, i.e. an affine map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    BadBlockShape,
    BadKeyLength,
    DimensionNotMultipleOfBlock,
    NibbleOutOfRange,
    NotAPermutation,
)
from .images import check_image

BLOCK = 4
N_CHANNELS = 6  # R-upper, G-upper, B-upper, R-lower, G-lower, B-lower
N_POSITIONS = BLOCK * BLOCK * N_CHANNELS  # 96


@dataclass(frozen=True)
class BlockwiseKey:
    seed_inv: int
    seed_shf: int

    def to_json(self) -> dict:
        return {"seed_inv": self.seed_inv, "seed_shf": self.seed_shf}

    @classmethod
    def from_json(cls, d: dict) -> "BlockwiseKey":
        return cls(d["seed_inv"], d["seed_shf"])


def expand_blockwise_key(key: BlockwiseKey) -> tuple[np.ndarray, np.ndarray]:
    """96 reversal bits and one permutation of the 96 positions."""
    bits = kernels.sm64_bits(key.seed_inv, N_POSITIONS)
    perm = kernels.sm64_perm(key.seed_shf, N_POSITIONS)
    return bits, perm


def split_nibbles(block: np.ndarray) -> np.ndarray:
    """(4,4,3) uint8 block -> (6,4,4) nibble channels.

    Flattening the result (C order) gives the canonical position order:
    channel-major, then row-major within a channel.
    """
    block = np.asarray(block)
    if block.shape != (BLOCK, BLOCK, 3):
        raise BadBlockShape(f"expected (4,4,3), got {block.shape}")
    upper = (block >> 4).transpose(2, 0, 1)
    lower = (block & 15).transpose(2, 0, 1)
    return np.concatenate([upper, lower], axis=0).astype(np.uint8)


def merge_nibbles(nibbles: np.ndarray) -> np.ndarray:
    """Inverse of split_nibbles."""
    nibbles = np.asarray(nibbles)
    if nibbles.shape != (N_CHANNELS, BLOCK, BLOCK):
        raise BadBlockShape(f"expected (6,4,4), got {nibbles.shape}")
    if nibbles.max() > 15:
        raise NibbleOutOfRange(f"nibble value {nibbles.max()} > 15")
    upper = nibbles[:3].astype(np.uint8)
    lower = nibbles[3:].astype(np.uint8)
    return ((upper << 4) | lower).transpose(1, 2, 0)


def invert_intensities(nibbles: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """Reverse v -> 15-v at every flat position whose key bit is set."""
    bits = np.asarray(bits)
    if bits.shape != (N_POSITIONS,):
        raise BadKeyLength(f"expected {N_POSITIONS} bits, got shape {bits.shape}")
    flat = np.asarray(nibbles).reshape(N_POSITIONS)
    out = np.where(bits.astype(bool), 15 - flat, flat)
    return out.reshape(N_CHANNELS, BLOCK, BLOCK).astype(np.uint8)


def shuffle_positions(nibbles: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Output flat position i holds input flat position perm[i]."""
    perm = np.asarray(perm)
    if perm.shape != (N_POSITIONS,) or not np.array_equal(np.sort(perm), np.arange(N_POSITIONS)):
        raise NotAPermutation("perm must be a bijection on {0..95}")
    flat = np.asarray(nibbles).reshape(N_POSITIONS)
    return flat[perm].reshape(N_CHANNELS, BLOCK, BLOCK).astype(np.uint8)


def _to_block_matrix(img: np.ndarray) -> np.ndarray:
    """All 4x4 blocks of an image as rows of 96 nibbles (canonical order)."""
    h, w = img.shape[:2]
    x = img.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK, 3).transpose(0, 2, 4, 1, 3)
    upper = x >> 4
    lower = x & 15
    nib = np.concatenate([upper, lower], axis=2)  # (hb, wb, 6, 4, 4)
    return np.ascontiguousarray(nib).reshape(-1, N_POSITIONS)


def _from_block_matrix(mat: np.ndarray, height: int, width: int) -> np.ndarray:
    hb, wb = height // BLOCK, width // BLOCK
    nib = mat.reshape(hb, wb, N_CHANNELS, BLOCK, BLOCK)
    px = (nib[:, :, :3] << 4) | nib[:, :, 3:]
    return np.ascontiguousarray(px.transpose(0, 3, 1, 4, 2).reshape(height, width, 3))


def _check_dims(img: np.ndarray) -> None:
    check_image(img)
    h, w = img.shape[:2]
    if h % BLOCK or w % BLOCK:
        raise DimensionNotMultipleOfBlock(
            f"image is {w}x{h}; both sides must be multiples of {BLOCK}"
        )


def encrypt_blockwise(img: np.ndarray, key: BlockwiseKey) -> np.ndarray:
    _check_dims(img)
    bits, perm = expand_blockwise_key(key)
    mat = kernels.blockwise_apply(_to_block_matrix(img), bits, perm, False)
    return _from_block_matrix(mat, img.shape[0], img.shape[1])


def decrypt_blockwise(img: np.ndarray, key: BlockwiseKey) -> np.ndarray:
    """Exact inverse of encrypt_blockwise under the same key."""
    _check_dims(img)
    bits, perm = expand_blockwise_key(key)
    mat = kernels.blockwise_apply(_to_block_matrix(img), bits, perm, True)
    return _from_block_matrix(mat, img.shape[0], img.shape[1])


def keyspace_blockwise_exact() -> int:
    """Exact number of distinct keys: 96! * 2^96."""
    return math.factorial(N_POSITIONS) * 2**N_POSITIONS


def keyspace_blockwise_bits() -> float:
    """log2 of the block-wise key space."""
    return sum(math.log2(k) for k in range(2, N_POSITIONS + 1)) + N_POSITIONS
