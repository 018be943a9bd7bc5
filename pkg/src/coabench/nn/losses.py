"""Losses returning (scalar, gradient wrt prediction)."""

from __future__ import annotations

import numpy as np

from ..errors import NumericalDivergence, ShapeMismatch

_CLAMP = 1e-12


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Mean over all elements of the squared difference."""
    if pred.shape != target.shape:
        raise ShapeMismatch(f"{pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    grad = 2.0 * diff / diff.size
    return loss, grad


def bce_loss(pred: np.ndarray, label):
    """Binary cross-entropy against 0/1 labels, clamped away from log(0).

    `label` may be a scalar or an array broadcastable to pred's shape.
    """
    y = np.broadcast_to(np.asarray(label, dtype=np.float64), pred.shape)
    p = np.clip(pred, _CLAMP, 1.0 - _CLAMP)
    loss = float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))
    grad = (-(y / p) + (1.0 - y) / (1.0 - p)) / p.size
    return loss, grad


def ensure_finite(what: str, *arrays):
    """Abort training on NaN/Inf rather than silently continuing."""
    for a in arrays:
        values = np.asanyarray(a)
        if not np.all(np.isfinite(values)):
            raise NumericalDivergence(f"non-finite values in {what}")
