"""Adversarial reconstruction from unpaired data.

A generator maps encrypted images toward the distribution of a disjoint
set of plain images; a discriminator scores real vs reconstructed.  No
key material and no paired plaintexts enter training: the function
signature admits neither, and content-level disjointness of the two
halves is checked rather than assumed.  Standard BCE minimax with the
non-saturating generator loss, Adam for both networks.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import DimensionMismatch, DisjointnessViolation
from .images import Dataset
from .nn.losses import ensure_finite

GENERATOR_KINDS = ("lc-tanh", "lc-tanh-identity", "lc-identity", "conv-tanh")


@dataclass
class GanConfig:
    epochs: int = 100
    learning_rate: float = 2e-4
    beta1: float = 0.5  # Adam first-moment decay; beta2 stays 0.999
    batch_size: int = 64
    seed: int = 0
    generator: str = "lc-tanh"
    discriminator: str = "conv"

    def __post_init__(self):
        if self.generator not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.generator!r}")
        if self.discriminator != "conv":
            raise ValueError(f"unknown discriminator kind {self.discriminator!r}")


@dataclass
class GanModel:
    generator: nn.Sequential
    discriminator: nn.Sequential
    config: GanConfig
    height: int
    width: int
    history: list[dict] = field(default_factory=list)

    def generator_checkpoint(self) -> bytes:
        return nn.save_model(self.generator)

    def checksum(self) -> str:
        return hashlib.sha256(self.generator_checkpoint()).hexdigest()


def build_generator(kind: str, height: int, width: int, rng) -> nn.Sequential:
    if kind == "lc-tanh":
        return nn.Sequential([nn.LocallyConnected1x1(3, 3, height, width, rng=rng), nn.Tanh()])
    if kind == "lc-tanh-identity":
        return nn.Sequential(
            [nn.LocallyConnected1x1(3, 3, height, width, init="identity"), nn.Tanh()]
        )
    if kind == "lc-identity":
        return nn.Sequential([nn.LocallyConnected1x1(3, 3, height, width, init="identity")])
    if kind == "conv-tanh":
        return nn.Sequential(
            [
                nn.Conv2D(3, 16, kernel=3, stride=1, padding=1, rng=rng),
                nn.LeakyReLU(0.2),
                nn.Conv2D(16, 3, kernel=3, stride=1, padding=1, rng=rng),
                nn.Tanh(),
            ]
        )
    raise ValueError(f"unknown generator kind {kind!r}")


def build_discriminator(height: int, width: int, rng) -> nn.Sequential:
    h2, w2 = (height + 1) // 2, (width + 1) // 2
    h4, w4 = (h2 + 1) // 2, (w2 + 1) // 2
    return nn.Sequential(
        [
            nn.Conv2D(3, 8, kernel=4, stride=2, padding=1, rng=rng),
            nn.LeakyReLU(0.2),
            nn.Conv2D(8, 16, kernel=4, stride=2, padding=1, rng=rng),
            nn.LeakyReLU(0.2),
            nn.Flatten(),
            nn.Dense(16 * h4 * w4, 1, rng=rng),
            nn.Sigmoid(),
        ]
    )


def to_unit(images) -> np.ndarray:
    """uint8 (N,H,W,3) -> float64 NCHW in [-1, 1]."""
    x = np.stack(list(images)).astype(np.float64)
    return (x / 127.5 - 1.0).transpose(0, 3, 1, 2)


def from_unit(y: np.ndarray) -> list[np.ndarray]:
    imgs = (np.asarray(y).transpose(0, 2, 3, 1) + 1.0) * 127.5
    imgs = np.clip(np.rint(imgs), 0, 255).astype(np.uint8)
    return [imgs[i] for i in range(imgs.shape[0])]


def _fingerprints(ds: Dataset) -> set:
    return {hashlib.sha256(img.tobytes()).hexdigest() for img in ds.images}


def train_gan_attack(enc_t1: Dataset, plain_t2: Dataset, cfg: GanConfig) -> GanModel:
    """Alternating D/G training on E(T1) vs T2.

    The two halves must be disjoint: origin indices (set by split_halves)
    must not overlap, and no identical image content may appear in both
    inputs.
    """
    if len(enc_t1) == 0 or len(plain_t2) == 0:
        raise DisjointnessViolation("both training halves must be non-empty")
    if enc_t1.indices is not None and plain_t2.indices is not None:
        shared = set(enc_t1.indices) & set(plain_t2.indices)
        if shared:
            raise DisjointnessViolation(f"image indices in both halves: {sorted(shared)[:8]}")
    if _fingerprints(enc_t1) & _fingerprints(plain_t2):
        raise DisjointnessViolation("training halves share image content")
    if cfg.batch_size > len(enc_t1) or cfg.batch_size > len(plain_t2):
        raise ValueError(
            f"batch size {cfg.batch_size} exceeds a training half "
            f"({len(enc_t1)}/{len(plain_t2)} images)"
        )
    h, w = enc_t1.images[0].shape[:2]
    if plain_t2.images[0].shape[:2] != (h, w):
        raise DimensionMismatch("training halves must share dimensions")

    rng = np.random.default_rng(cfg.seed)
    gen = build_generator(cfg.generator, h, w, rng)
    disc = build_discriminator(h, w, rng)
    opt_g = nn.Adam(cfg.learning_rate, beta1=cfg.beta1)
    opt_d = nn.Adam(cfg.learning_rate, beta1=cfg.beta1)

    x_enc = to_unit(enc_t1.images)
    x_real = to_unit(plain_t2.images)
    n_batches = min(len(enc_t1), len(plain_t2)) // cfg.batch_size
    bsz = cfg.batch_size
    history = []
    for epoch in range(cfg.epochs):
        enc_order = rng.permutation(len(enc_t1))
        real_order = rng.permutation(len(plain_t2))
        sums = dict.fromkeys(("d_loss", "g_loss", "d_real_mean", "d_fake_mean"), 0.0)
        for bi in range(n_batches):
            enc_batch = x_enc[enc_order[bi * bsz : (bi + 1) * bsz]]
            real_batch = x_real[real_order[bi * bsz : (bi + 1) * bsz]]

            # discriminator step: one combined real+fake batch
            fake = gen.forward(enc_batch)
            d_in = np.concatenate([real_batch, fake])
            labels = np.concatenate([np.ones((bsz, 1)), np.zeros((bsz, 1))])
            pred = disc.forward(d_in)
            d_loss, d_grad = nn.bce_loss(pred, labels)
            ensure_finite("discriminator loss", d_loss)
            disc.backward(d_grad)
            opt_d.step(disc.params(), disc.grads(), epoch)
            d_real_mean = float(pred[:bsz].mean())
            d_fake_mean = float(pred[bsz:].mean())

            # generator step: non-saturating loss -ln D(G(e))
            fake = gen.forward(enc_batch)
            pred_fake = disc.forward(fake)
            g_loss, g_grad = nn.bce_loss(pred_fake, 1.0)
            ensure_finite("generator loss", g_loss)
            gx = disc.backward(g_grad)
            gen.backward(gx)
            ensure_finite("generator gradients", *gen.grads())
            opt_g.step(gen.params(), gen.grads(), epoch)

            sums["d_loss"] += d_loss
            sums["g_loss"] += g_loss
            sums["d_real_mean"] += d_real_mean
            sums["d_fake_mean"] += d_fake_mean
        row = {k: v / n_batches for k, v in sums.items()}
        row["epoch"] = epoch
        history.append(row)
    return GanModel(gen, disc, cfg, h, w, history)


def gan_reconstruct(model: GanModel, enc_q: Dataset) -> Dataset:
    """Q' = G(E(Q)), rescaled to 8-bit images."""
    if enc_q.images[0].shape[:2] != (model.height, model.width):
        raise DimensionMismatch(
            f"model fits {model.width}x{model.height}, got {enc_q.images[0].shape}"
        )
    out = []
    for start in range(0, len(enc_q), 64):
        batch = to_unit(enc_q.images[start : start + 64])
        out.extend(from_unit(model.generator.forward(batch)))
    return Dataset(out, list(enc_q.roles))


def history_to_csv(history) -> str:
    buf = io.StringIO()
    buf.write("epoch,d_loss,g_loss,d_real_mean,d_fake_mean\n")
    for row in history:
        buf.write(
            f"{row['epoch']},{row['d_loss']:.6f},{row['g_loss']:.6f},"
            f"{row['d_real_mean']:.6f},{row['d_fake_mean']:.6f}\n"
        )
    return buf.getvalue()
