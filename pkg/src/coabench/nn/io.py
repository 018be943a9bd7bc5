"""Model checkpoint serialization.

Self-describing little-endian binary: magic "LIEN", u32 version, u32
flavor tag (0 generic stack, 1 per-pixel affine, 2 block affine), u32
layer count, then per layer a u32 kind tag, its fixed-size config, and
its raw float64 parameters.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import DataError
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

MAGIC = b"LIEN"
VERSION = 1

FLAVOR_GENERIC = 0
FLAVOR_PIXEL_AFFINE = 1
FLAVOR_BLOCK_AFFINE = 2

_KIND_DENSE = 1
_KIND_CONV = 2
_KIND_LC = 3
_KIND_LRELU = 4
_KIND_TANH = 5
_KIND_SIGMOID = 6
_KIND_FLATTEN = 7


def _pack_params(layer) -> bytes:
    return b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in layer.params())


def save_model(model: Sequential, flavor: int = FLAVOR_GENERIC) -> bytes:
    out = [MAGIC, struct.pack("<III", VERSION, flavor, len(model.layers))]
    for layer in model.layers:
        if isinstance(layer, Dense):
            out.append(struct.pack("<III", _KIND_DENSE, layer.n_in, layer.n_out))
        elif isinstance(layer, Conv2D):
            out.append(
                struct.pack(
                    "<IIIIII",
                    _KIND_CONV,
                    layer.c_in,
                    layer.c_out,
                    layer.kernel,
                    layer.stride,
                    layer.padding,
                )
            )
        elif isinstance(layer, LocallyConnected1x1):
            out.append(
                struct.pack(
                    "<IIIII", _KIND_LC, layer.c_in, layer.c_out, layer.height, layer.width
                )
            )
        elif isinstance(layer, LeakyReLU):
            out.append(struct.pack("<Id", _KIND_LRELU, layer.alpha))
        elif isinstance(layer, Tanh):
            out.append(struct.pack("<I", _KIND_TANH))
        elif isinstance(layer, Sigmoid):
            out.append(struct.pack("<I", _KIND_SIGMOID))
        elif isinstance(layer, Flatten):
            out.append(struct.pack("<I", _KIND_FLATTEN))
        else:
            raise TypeError(f"cannot serialize layer {type(layer).__name__}")
        out.append(_pack_params(layer))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise DataError("truncated checkpoint")
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals

    def take_f64(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        size = 8 * n
        if self.pos + size > len(self.data):
            raise DataError("truncated checkpoint")
        arr = np.frombuffer(self.data, dtype="<f8", count=n, offset=self.pos)
        self.pos += size
        return arr.reshape(shape).astype(np.float64)


def load_model(data: bytes) -> tuple[Sequential, int]:
    """Rebuild a stack from checkpoint bytes; returns (model, flavor)."""
    if data[:4] != MAGIC:
        raise DataError(f"bad checkpoint magic {data[:4]!r}")
    r = _Reader(data)
    r.pos = 4
    version, flavor, n_layers = r.take("<III")
    if version != VERSION:
        raise DataError(f"unsupported checkpoint version {version}")
    layers = []
    for _ in range(n_layers):
        (kind,) = r.take("<I")
        if kind == _KIND_DENSE:
            n_in, n_out = r.take("<II")
            layer = Dense(n_in, n_out)
            layer.w[...] = r.take_f64((n_in, n_out))
            layer.b[...] = r.take_f64((n_out,))
        elif kind == _KIND_CONV:
            c_in, c_out, kernel, stride, padding = r.take("<IIIII")
            layer = Conv2D(c_in, c_out, kernel, stride, padding)
            layer.w[...] = r.take_f64((c_out, c_in, kernel, kernel))
            layer.b[...] = r.take_f64((c_out,))
        elif kind == _KIND_LC:
            c_in, c_out, height, width = r.take("<IIII")
            layer = LocallyConnected1x1(c_in, c_out, height, width)
            layer.w[...] = r.take_f64((height * width, c_out, c_in))
            layer.b[...] = r.take_f64((height * width, c_out))
        elif kind == _KIND_LRELU:
            (alpha,) = r.take("<d")
            layer = LeakyReLU(alpha)
        elif kind == _KIND_TANH:
            layer = Tanh()
        elif kind == _KIND_SIGMOID:
            layer = Sigmoid()
        elif kind == _KIND_FLATTEN:
            layer = Flatten()
        else:
            raise DataError(f"unknown layer kind tag {kind}")
        layers.append(layer)
    return Sequential(layers), flavor
