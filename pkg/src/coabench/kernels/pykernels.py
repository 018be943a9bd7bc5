"""Vectorized NumPy implementations of the hot kernels.

This is the fallback backend used when the compiled extension is not
built.  Integer kernels (PRNG expansion, cipher application) must agree
bit-for-bit with the compiled versions; float kernels agree to rounding
error, except gauss_valid which accumulates taps in the same order in
both backends and is therefore also bit-identical.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidBound

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1
_TWO64 = 1 << 64

# the 6 permutations of (R,G,B) in lexicographic order; row k lists the
# source channel feeding each output channel
COLOR_PERM_TABLE = np.array(
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]],
    dtype=np.int64,
)
_COLOR_PERM_INV = np.argsort(COLOR_PERM_TABLE, axis=1)


def sm64_u64s(seed: int, n: int) -> np.ndarray:
    """First n SplitMix64 draws of a fresh stream, as uint64."""
    if n < 0:
        raise ValueError("n must be >= 0")
    states = np.uint64(seed & _MASK64) + np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_GAMMA)
    z = states
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def sm64_bits(seed: int, n: int) -> np.ndarray:
    """First n MSB draws (0/1) of a fresh stream, as uint8."""
    return (sm64_u64s(seed, n) >> np.uint64(63)).astype(np.uint8)


def _bounded_scalar(seed: int, n: int, m: int) -> np.ndarray:
    # exact sequential rejection semantics; only hit when a draw lands in
    # the rejection zone (probability < m / 2^64 per draw)
    out = np.empty(n, dtype=np.uint64)
    state = seed & _MASK64
    limit = _TWO64 - (_TWO64 % m)
    for i in range(n):
        while True:
            state = (state + _GAMMA) & _MASK64
            z = state
            z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
            z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
            z = (z ^ (z >> 31)) & _MASK64
            if z < limit:
                out[i] = z
                break
    return out


def sm64_bounded(seed: int, n: int, m: int) -> np.ndarray:
    """First n rejection-sampled draws in [0, m) of a fresh stream."""
    if m < 1:
        raise InvalidBound(f"bound must be >= 1, got {m}")
    draws = sm64_u64s(seed, n)
    rem = _TWO64 % m
    if rem == 0:
        return draws % np.uint64(m)
    limit = np.uint64(_TWO64 - rem)
    if np.all(draws < limit):
        return draws % np.uint64(m)
    # a rejection shifts every later draw; redo the whole run sequentially
    return _bounded_scalar(seed, n, m)


def sm64_perm(seed: int, k: int) -> np.ndarray:
    """Fisher-Yates permutation of {0..k-1} drawn from a fresh stream."""
    if k < 1:
        raise InvalidBound(f"permutation size must be >= 1, got {k}")
    perm = np.arange(k, dtype=np.int64)
    if k == 1:
        return perm
    bounds = np.arange(k, 1, -1, dtype=np.uint64)  # i+1 for i = k-1 .. 1
    draws = sm64_u64s(seed, k - 1)
    rems = (np.uint64(_MASK64) % bounds + np.uint64(1)) % bounds  # 2^64 mod bound
    accept = (rems == 0) | (draws < (np.uint64(0) - rems))
    if bool(np.all(accept)):
        js = (draws % bounds).astype(np.int64)
    else:
        js = np.empty(k - 1, dtype=np.int64)
        state = seed & _MASK64
        for t, b in enumerate(range(k, 1, -1)):
            limit = _TWO64 - (_TWO64 % b)
            while True:
                state = (state + _GAMMA) & _MASK64
                z = state
                z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
                z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
                z = (z ^ (z >> 31)) & _MASK64
                if z < limit:
                    js[t] = z % b
                    break
    for t, i in enumerate(range(k - 1, 0, -1)):
        j = js[t]
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def pixelwise_apply(px: np.ndarray, flips: np.ndarray, perm_idx: np.ndarray, decrypt: bool) -> np.ndarray:
    """Conditional complement + per-pixel color shuffle over flat (N,3) pixels.

    Encryption complements first, then shuffles; decryption un-shuffles,
    then complements (the complement is an involution).
    """
    if decrypt:
        v = np.take_along_axis(px, _COLOR_PERM_INV[perm_idx], axis=1)
        return np.where(flips.astype(bool), 255 - v, v).astype(np.uint8)
    v = np.where(flips.astype(bool), 255 - px, px)
    return np.take_along_axis(v, COLOR_PERM_TABLE[perm_idx], axis=1).astype(np.uint8)


def blockwise_apply(nibbles: np.ndarray, bits: np.ndarray, perm: np.ndarray, decrypt: bool) -> np.ndarray:
    """Keyed intensity reversal + position shuffle over (B, 96) nibble rows."""
    mask = bits.astype(bool)[None, :]
    if decrypt:
        u = nibbles[:, np.argsort(perm)]
        return np.where(mask, 15 - u, u).astype(np.uint8)
    v = np.where(mask, 15 - nibbles, nibbles)
    return v[:, perm].astype(np.uint8)


def gauss_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation of a 2-D image with a 1-D window.

    Taps accumulate in index order so the result is bit-identical to the
    compiled backend.
    """
    h, w = img.shape
    t = kernel.shape[0]
    cols = w - t + 1
    rows = h - t + 1
    tmp = kernel[0] * img[:, 0:cols]
    for i in range(1, t):
        tmp += kernel[i] * img[:, i : i + cols]
    out = kernel[0] * tmp[0:rows, :]
    for i in range(1, t):
        out += kernel[i] * tmp[i : i + rows, :]
    return out


def conv2d_fwd(x, w, b, sh, sw, ph, pw):
    """Standard cross-correlation, NCHW layout, f64."""
    bsz, cin, h, wid = x.shape
    cout, _, kh, kw = w.shape
    ho = (h + 2 * ph - kh) // sh + 1
    wo = (wid + 2 * pw - kw) // sw + 1
    xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    cols = np.empty((bsz, cin, kh, kw, ho, wo), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i : i + sh * ho : sh, j : j + sw * wo : sw]
    y = np.tensordot(cols, w, axes=([1, 2, 3], [1, 2, 3]))
    return np.ascontiguousarray(y.transpose(0, 3, 1, 2)) + b[None, :, None, None]


def conv2d_bwd(x, w, gy, sh, sw, ph, pw):
    """Gradients of conv2d_fwd wrt input, weights and bias."""
    bsz, cin, h, wid = x.shape
    cout, _, kh, kw = w.shape
    ho, wo = gy.shape[2], gy.shape[3]
    xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    cols = np.empty((bsz, cin, kh, kw, ho, wo), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i : i + sh * ho : sh, j : j + sw * wo : sw]
    gb = gy.sum(axis=(0, 2, 3))
    gw = np.tensordot(gy, cols, axes=([0, 2, 3], [0, 4, 5]))
    gxp = np.zeros_like(xp)
    for i in range(kh):
        for j in range(kw):
            contrib = np.tensordot(gy, w[:, :, i, j], axes=([1], [0]))  # (B,Ho,Wo,Cin)
            gxp[:, :, i : i + sh * ho : sh, j : j + sw * wo : sw] += contrib.transpose(0, 3, 1, 2)
    gx = gxp[:, :, ph : ph + h, pw : pw + wid]
    return np.ascontiguousarray(gx), gw, gb


def lc1x1_fwd(x, w, b):
    """Per-pixel unshared affine map: x (B,Ci,P), w (P,Co,Ci), b (P,Co)."""
    y = np.einsum("poi,bip->bop", w, x)
    return y + b.T[None, :, :]


def lc1x1_bwd(x, w, gy):
    gx = np.einsum("poi,bop->bip", w, gy)
    gw = np.einsum("bop,bip->poi", gy, x)
    gb = gy.sum(axis=0).T
    return gx, np.ascontiguousarray(gw), np.ascontiguousarray(gb)
