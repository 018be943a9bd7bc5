"""Minimal numerical kernel for the trainable attacks: layers with manual
gradients, losses, optimizers, checkpoint I/O."""

from .io import (
    FLAVOR_BLOCK_AFFINE,
    FLAVOR_GENERIC,
    FLAVOR_PIXEL_AFFINE,
    load_model,
    save_model,
)
from .layers import (
    Conv2D,
    Dense,
    Flatten,
    LeakyReLU,
    LocallyConnected1x1,
    Sequential,
    Sigmoid,
    Tanh,
)
from .losses import bce_loss, ensure_finite, mse_loss
from .optim import SGD, Adam

__all__ = [
    "Conv2D",
    "Dense",
    "Flatten",
    "LeakyReLU",
    "LocallyConnected1x1",
    "Sequential",
    "Sigmoid",
    "Tanh",
    "SGD",
    "Adam",
    "bce_loss",
    "mse_loss",
    "ensure_finite",
    "save_model",
    "load_model",
    "FLAVOR_GENERIC",
    "FLAVOR_PIXEL_AFFINE",
    "FLAVOR_BLOCK_AFFINE",
]
