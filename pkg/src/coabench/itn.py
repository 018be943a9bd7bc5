"""Inverse transformation attack: learn a cipher's inverse from exact
(plaintext, ciphertext) pairs.

For the pixel-wise cipher under one key the true inverse is a per-pixel
affine map (channel permutation plus conditional complement), so a stack
of 1x1 locally-connected layers contains it and ridge least squares
recovers it directly.  For the block-wise cipher the inverse is one
affine map on 96-dim nibble vectors shared by all blocks, so a single
ridge solve pooled over every block recovers that.  Per-image keys break
the assumption of one fixed target map, which is exactly what the
key-policy comparison measures.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import nn
from .blockwise import BLOCK, N_POSITIONS, _from_block_matrix, _to_block_matrix
from .errors import (
    DimensionMismatch,
    DimensionNotMultipleOfBlock,
    InsufficientPairs,
    SingularSystem,
)
from .images import check_image
from .nn.losses import ensure_finite

log = logging.getLogger(__name__)


@dataclass
class PairedSet:
    """Exact (encrypted, plain) correspondences, all with equal dimensions."""

    pairs: list[tuple[np.ndarray, np.ndarray]]

    def __post_init__(self):
        if not self.pairs:
            raise InsufficientPairs("paired set is empty")
        dims = set()
        for enc, plain in self.pairs:
            check_image(enc)
            check_image(plain)
            dims.add(enc.shape)
            dims.add(plain.shape)
        if len(dims) > 1:
            raise DimensionMismatch(f"pairs must share dimensions, got {sorted(dims)}")
        self.height, self.width = self.pairs[0][0].shape[:2]

    def __len__(self):
        return len(self.pairs)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked float64 arrays (N, H, W, 3): encrypted, plain."""
        enc = np.stack([e for e, _ in self.pairs]).astype(np.float64)
        plain = np.stack([p for _, p in self.pairs]).astype(np.float64)
        return enc, plain


@dataclass
class PixelAffineModel:
    """One 3x3 matrix and 3-vector offset per pixel position."""

    a: np.ndarray  # (P, 3, 3)
    b: np.ndarray  # (P, 3)
    height: int
    width: int

    def apply(self, img: np.ndarray) -> np.ndarray:
        check_image(img)
        if img.shape[:2] != (self.height, self.width):
            raise DimensionMismatch(
                f"model fits {self.width}x{self.height}, image is "
                f"{img.shape[1]}x{img.shape[0]}"
            )
        x = img.reshape(-1, 3).astype(np.float64)
        y = np.einsum("pci,pi->pc", self.a, x) + self.b
        return np.clip(np.rint(y), 0, 255).astype(np.uint8).reshape(img.shape)

    def to_checkpoint(self) -> bytes:
        layer = nn.LocallyConnected1x1(3, 3, self.height, self.width)
        layer.w[...] = self.a
        layer.b[...] = self.b
        return nn.save_model(nn.Sequential([layer]), nn.FLAVOR_PIXEL_AFFINE)

    @classmethod
    def from_checkpoint(cls, data: bytes) -> "PixelAffineModel":
        model, flavor = nn.load_model(data)
        if flavor != nn.FLAVOR_PIXEL_AFFINE:
            raise ValueError("checkpoint is not a pixel-affine model")
        layer = model.layers[0]
        return cls(layer.w.copy(), layer.b.copy(), layer.height, layer.width)


@dataclass
class BlockAffineModel:
    """One affine map on flattened 96-nibble vectors, shared by all blocks."""

    a: np.ndarray  # (96, 96)
    t: np.ndarray  # (96,)

    def apply(self, img: np.ndarray) -> np.ndarray:
        check_image(img)
        if img.shape[0] % BLOCK or img.shape[1] % BLOCK:
            raise DimensionNotMultipleOfBlock(f"image shape {img.shape}")
        mat = _to_block_matrix(img).astype(np.float64)
        rec = mat @ self.a.T + self.t
        rec = np.clip(np.rint(rec), 0, 15).astype(np.uint8)
        return _from_block_matrix(rec, img.shape[0], img.shape[1])

    def to_checkpoint(self) -> bytes:
        layer = nn.Dense(N_POSITIONS, N_POSITIONS)
        layer.w[...] = self.a.T
        layer.b[...] = self.t
        return nn.save_model(nn.Sequential([layer]), nn.FLAVOR_BLOCK_AFFINE)

    @classmethod
    def from_checkpoint(cls, data: bytes) -> "BlockAffineModel":
        model, flavor = nn.load_model(data)
        if flavor != nn.FLAVOR_BLOCK_AFFINE:
            raise ValueError("checkpoint is not a block-affine model")
        layer = model.layers[0]
        return cls(layer.w.T.copy(), layer.b.copy())


def fit_itn_pixelwise_closed(pairs: PairedSet, ridge: float = 1e-6) -> PixelAffineModel:
    """Per-pixel ridge least squares via 4x4 normal equations.

    The ridge penalty applies to the matrix entries only, not the offset;
    any ridge > 0 makes every pixel's system positive definite.  At
    ridge 0 a singular pixel falls back to the identity map.
    """
    if len(pairs) < 4:
        raise InsufficientPairs(f"need >= 4 pairs, got {len(pairs)}")
    enc, plain = pairs.arrays()
    n = enc.shape[0]
    e = enc.reshape(n, -1, 3)
    t = plain.reshape(n, -1, 3)
    n_px = e.shape[1]
    x = np.concatenate([e, np.ones((n, n_px, 1))], axis=2)  # (N, P, 4)
    gram = np.einsum("npi,npj->pij", x, x)  # (P, 4, 4)
    rhs = np.einsum("npi,npc->pic", x, t)  # (P, 4, 3)
    reg = np.diag([ridge, ridge, ridge, 0.0])
    theta = np.empty((n_px, 4, 3))
    try:
        theta[...] = np.linalg.solve(gram + reg, rhs)
    except np.linalg.LinAlgError:
        fallback = 0
        ident = np.zeros((4, 3))
        ident[:3, :] = np.eye(3)
        for p in range(n_px):
            try:
                theta[p] = np.linalg.solve(gram[p] + reg, rhs[p])
            except np.linalg.LinAlgError:
                theta[p] = ident
                fallback += 1
        if fallback:
            log.warning("%d/%d pixels had singular systems; identity fallback", fallback, n_px)
    a = theta[:, :3, :].transpose(0, 2, 1)  # (P, 3, 3), out_c = sum_i a[c,i] e_i
    b = theta[:, 3, :]
    return PixelAffineModel(a, b, pairs.height, pairs.width)


def fit_itn_pixelwise_sgd(
    pairs: PairedSet,
    epochs: int = 70,
    lr: float = 0.1,
    schedule=((40, 0.1), (60, 0.1)),
    momentum: float = 0.9,
    weight_decay: float = 5e-4,
    batch_size: int = 128,
    seed: int = 0,
    init: str = "random",
) -> PixelAffineModel:
    """Train the 3-layer locally-connected stack by momentum SGD.

    Defaults follow the reference training recipe: 70 epochs, initial
    learning rate 0.1 stepped down tenfold at epochs 40 and 60, momentum
    0.9, weight decay 5e-4, batch size 128, MSE loss.

    Two details matter for this deep linear stack to actually converge:
    the loss gradient is summed over pixel positions (mean over batch and
    channels only) so per-pixel step sizes do not shrink with image size,
    and layers start at per-pixel normal(0, 0.5) weights because a stack
    initialized at identity cannot sign-flip its product (complemented
    channels sit at a saddle where the product passes through zero).
    init="identity" remains available; with epochs=0 it returns the exact
    passthrough model.

    Images are scaled to [-1, 1] for optimization; the collapsed affine
    map is returned on the 8-bit scale.
    """
    if init not in ("random", "identity"):
        raise ValueError(f"init must be random|identity, got {init!r}")
    enc, plain = pairs.arrays()
    n = enc.shape[0]
    h, w = pairs.height, pairs.width
    n_px = h * w
    x_all = (enc / 127.5 - 1.0).transpose(0, 3, 1, 2)  # (N, 3, H, W)
    y_all = (plain / 127.5 - 1.0).transpose(0, 3, 1, 2)

    init_rng = np.random.default_rng(seed)
    stack = []
    for _ in range(3):
        layer = nn.LocallyConnected1x1(3, 3, h, w, init="identity")
        if init == "random":
            layer.w[...] = init_rng.normal(0.0, 0.5, layer.w.shape)
        stack.append(layer)
    model = nn.Sequential(stack)
    opt = nn.SGD(lr, momentum=momentum, weight_decay=weight_decay, schedule=schedule)
    rng = np.random.default_rng(seed)
    bsz = min(batch_size, n)
    for epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n - bsz + 1, bsz):
            idx = order[start : start + bsz]
            pred = model.forward(x_all[idx])
            loss, grad = nn.mse_loss(pred, y_all[idx])
            ensure_finite("itn-sgd loss", loss)
            model.backward(grad * n_px)
            ensure_finite("itn-sgd gradients", *model.grads())
            opt.step(model.params(), model.grads(), epoch)

    # collapse the linear stack, then move from [-1,1] to 8-bit scale
    a = stack[0].w
    b = stack[0].b
    for layer in stack[1:]:
        a = np.einsum("poi,pij->poj", layer.w, a)
        b = np.einsum("poi,pi->po", layer.w, b) + layer.b
    b8 = 127.5 * (b + 1.0 - a @ np.ones(3))
    return PixelAffineModel(a.copy(), b8, h, w)


def fit_itn_blockwise_nibble(pairs: PairedSet, ridge: float = 1e-6) -> BlockAffineModel:
    """Pooled ridge least squares over every 4x4 block of every pair."""
    if pairs.height % BLOCK or pairs.width % BLOCK:
        raise DimensionNotMultipleOfBlock(f"{pairs.width}x{pairs.height}")
    enc_mats = []
    plain_mats = []
    for enc_img, plain_img in pairs.pairs:
        enc_mats.append(_to_block_matrix(enc_img))
        plain_mats.append(_to_block_matrix(plain_img))
    e = np.concatenate(enc_mats).astype(np.float64)  # (M, 96)
    t = np.concatenate(plain_mats).astype(np.float64)
    m = e.shape[0]
    if m < N_POSITIONS + 1:
        raise InsufficientPairs(f"need >= {N_POSITIONS + 1} blocks, got {m}")
    x = np.concatenate([e, np.ones((m, 1))], axis=1)  # (M, 97)
    gram = x.T @ x
    reg = ridge * np.eye(N_POSITIONS + 1)
    reg[-1, -1] = 0.0
    try:
        theta = np.linalg.solve(gram + reg, x.T @ t)  # (97, 96)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("pooled block system is singular; raise ridge") from exc
    return BlockAffineModel(theta[:N_POSITIONS].T.copy(), theta[N_POSITIONS].copy())


def apply_itn(model, images) -> list[np.ndarray]:
    """Run a fitted model over a list of images."""
    return [model.apply(img) for img in images]
