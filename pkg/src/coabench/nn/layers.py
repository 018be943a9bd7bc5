"""Differentiable layers with manual backward passes.

Tensors are float64 NumPy arrays with a leading batch dimension.  Each
layer caches what its backward pass needs during forward; backward
returns the input gradient and assigns parameter gradients to the
layer's .g* slots (assign, not accumulate: one backward per step).
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import ShapeMismatch

INIT_STD = 0.02  # DCGAN-convention weight init


class Layer:
    """Base: stateless layers only override forward/backward."""

    def params(self):
        return []

    def grads(self):
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, gy: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.n_in, self.n_out = n_in, n_out
        self.w = rng.normal(0.0, INIT_STD, (n_in, n_out))
        self.b = np.zeros(n_out)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.gw, self.gb]

    def forward(self, x):
        if x.ndim > 2:  # accept feature maps; flatten per sample
            x = x.reshape(x.shape[0], -1)
        if x.shape[1] != self.n_in:
            raise ShapeMismatch(f"dense expects {self.n_in} features, got {x.shape}")
        self._x = x
        return x @ self.w + self.b

    def backward(self, gy):
        self.gw[...] = self._x.T @ gy
        self.gb[...] = gy.sum(axis=0)
        return gy @ self.w.T


class Conv2D(Layer):
    """Cross-correlation over NCHW maps."""

    def __init__(self, c_in, c_out, kernel=4, stride=2, padding=1, rng=None):
        if kernel < 1 or stride < 1:
            raise ValueError("kernel and stride must be >= 1")
        rng = rng or np.random.default_rng(0)
        self.c_in, self.c_out = c_in, c_out
        self.kernel, self.stride, self.padding = kernel, stride, padding
        self.w = rng.normal(0.0, INIT_STD, (c_out, c_in, kernel, kernel))
        self.b = np.zeros(c_out)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.gw, self.gb]

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.c_in:
            raise ShapeMismatch(f"conv expects (B,{self.c_in},H,W), got {x.shape}")
        self._x = x
        s, p = self.stride, self.padding
        return kernels.conv2d_fwd(x, self.w, self.b, s, s, p, p)

    def backward(self, gy):
        s, p = self.stride, self.padding
        gx, gw, gb = kernels.conv2d_bwd(self._x, self.w, gy, s, s, p, p)
        self.gw[...] = gw
        self.gb[...] = gb
        return gx


class LocallyConnected1x1(Layer):
    """Per-pixel affine map with unshared weights.

    Works like a 1x1 convolution except every pixel position has its own
    (c_out, c_in) matrix and bias.  A stack of these with no activation in
    between collapses to a single per-pixel affine map.
    """

    def __init__(self, c_in, c_out, height, width, rng=None, init="normal"):
        rng = rng or np.random.default_rng(0)
        self.c_in, self.c_out = c_in, c_out
        self.height, self.width = height, width
        n_px = height * width
        if init == "identity":
            if c_in != c_out:
                raise ValueError("identity init needs c_in == c_out")
            self.w = np.tile(np.eye(c_out), (n_px, 1, 1))
        elif init == "normal":
            self.w = rng.normal(0.0, INIT_STD, (n_px, c_out, c_in))
        else:
            raise ValueError(f"unknown init {init!r}")
        self.b = np.zeros((n_px, c_out))
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.gw, self.gb]

    def forward(self, x):
        if x.ndim != 4 or x.shape[1:] != (self.c_in, self.height, self.width):
            raise ShapeMismatch(
                f"expects (B,{self.c_in},{self.height},{self.width}), got {x.shape}"
            )
        flat = x.reshape(x.shape[0], self.c_in, -1)
        self._x = flat
        y = kernels.lc1x1_fwd(flat, self.w, self.b)
        return y.reshape(x.shape[0], self.c_out, self.height, self.width)

    def backward(self, gy):
        gy_flat = gy.reshape(gy.shape[0], self.c_out, -1)
        gx, gw, gb = kernels.lc1x1_bwd(self._x, self.w, gy_flat)
        self.gw[...] = gw
        self.gb[...] = gb
        return gx.reshape(gy.shape[0], self.c_in, self.height, self.width)


class LeakyReLU(Layer):
    def __init__(self, alpha=0.2):
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must be in (0,1), got {alpha}")
        self.alpha = alpha
        self._mask = None

    def forward(self, x):
        self._mask = x >= 0
        return np.where(self._mask, x, self.alpha * x)

    def backward(self, gy):
        return np.where(self._mask, gy, self.alpha * gy)


class Tanh(Layer):
    def forward(self, x):
        self._y = np.tanh(x)
        return self._y

    def backward(self, gy):
        return gy * (1.0 - self._y * self._y)


class Sigmoid(Layer):
    def forward(self, x):
        self._y = 1.0 / (1.0 + np.exp(-x))
        return self._y

    def backward(self, gy):
        return gy * self._y * (1.0 - self._y)


class Flatten(Layer):
    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, gy):
        return gy.reshape(self._shape)


class Sequential:
    def __init__(self, layers):
        self.layers = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, gy):
        for layer in reversed(self.layers):
            gy = layer.backward(gy)
        return gy

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def grads(self):
        out = []
        for layer in self.layers:
            out.extend(layer.grads())
        return out
