"""Kernel backend selection.

The hot inner loops (keystream expansion, cipher application, SSIM
windowing, conv / locally-connected forward-backward) exist twice: a
compiled Cython core and a vectorized NumPy fallback.  The compiled core
is preferred when built; COABENCH_KERNELS=python|c|auto overrides.

Integer kernels agree bit-for-bit between backends, gauss_valid too;
conv2d/lc1x1 agree to rounding error (see tests/test_kernels.py and
benchmarks/bench_kernels.py).
"""

import os

from . import pykernels

_choice = os.environ.get("COABENCH_KERNELS", "auto").lower()
if _choice not in ("auto", "c", "python"):
    raise ValueError(f"COABENCH_KERNELS must be auto, c or python, not {_choice!r}")

_impl = None
if _choice in ("auto", "c"):
    try:
        from . import ckernels as _impl
    except ImportError:
        if _choice == "c":
            raise
        _impl = None
if _impl is None:
    _impl = pykernels

BACKEND = "python" if _impl is pykernels else "c"

COLOR_PERM_TABLE = pykernels.COLOR_PERM_TABLE

sm64_u64s = _impl.sm64_u64s
sm64_bits = _impl.sm64_bits
sm64_bounded = _impl.sm64_bounded
sm64_perm = _impl.sm64_perm
pixelwise_apply = _impl.pixelwise_apply
blockwise_apply = _impl.blockwise_apply
gauss_valid = _impl.gauss_valid
conv2d_fwd = _impl.conv2d_fwd
conv2d_bwd = _impl.conv2d_bwd
lc1x1_fwd = _impl.lc1x1_fwd
lc1x1_bwd = _impl.lc1x1_bwd
