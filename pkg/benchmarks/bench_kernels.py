#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Runs each kernel on representative workloads (96x96 images, the GAN
discriminator's conv shapes, the 11-tap SSIM window) and prints a table
with per-call times and the speed ratio.  Usage:

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from coabench.kernels import pykernels as pk

try:
    from coabench.kernels import ckernels as ck
except ImportError:
    ck = None


def timeit(fn, repeats):
    fn()  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(0)
    n_px = 96 * 96

    px = rng.integers(0, 256, (n_px, 3), dtype=np.uint8)
    flips = rng.integers(0, 2, (n_px, 3), dtype=np.uint8)
    idx = rng.integers(0, 6, n_px, dtype=np.uint8)
    yield "sm64_u64s 27k draws", lambda m: m.sm64_u64s(42, 3 * n_px)
    yield "sm64_bounded 9k draws (m=6)", lambda m: m.sm64_bounded(42, n_px, 6)
    yield "sm64_perm k=96", lambda m: m.sm64_perm(42, 96)
    yield "pixelwise_apply 96x96", lambda m: m.pixelwise_apply(px, flips, idx, False)

    nib = rng.integers(0, 16, (576, 96), dtype=np.uint8)
    bits = rng.integers(0, 2, 96, dtype=np.uint8)
    perm = rng.permutation(96).astype(np.int64)
    yield "blockwise_apply 576 blocks", lambda m: m.blockwise_apply(nib, bits, perm, False)

    img = rng.standard_normal((96, 96))
    win = rng.random(11)
    win /= win.sum()
    yield "gauss_valid 96x96 w=11", lambda m: m.gauss_valid(img, win)

    x = rng.standard_normal((64, 3, 32, 32))
    w = rng.standard_normal((8, 3, 4, 4))
    b = rng.standard_normal(8)
    y = None

    def fwd(m):
        nonlocal y
        y = m.conv2d_fwd(x, w, b, 2, 2, 1, 1)

    yield "conv2d_fwd b64 3->8 k4 s2", fwd
    fwd(pk)
    gy = rng.standard_normal(y.shape)
    yield "conv2d_bwd b64 3->8 k4 s2", lambda m: m.conv2d_bwd(x, w, gy, 2, 2, 1, 1)

    xl = rng.standard_normal((64, 3, 1024))
    wl = rng.standard_normal((1024, 3, 3))
    bl = rng.standard_normal((1024, 3))
    yield "lc1x1_fwd b64 1024px", lambda m: m.lc1x1_fwd(xl, wl, bl)
    gyl = rng.standard_normal((64, 3, 1024))
    yield "lc1x1_bwd b64 1024px", lambda m: m.lc1x1_bwd(xl, wl, gyl)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args()

    if ck is None:
        print("compiled kernels not built; showing NumPy fallback only")
    header = f"{'kernel':34s} {'numpy':>10s} {'compiled':>10s} {'ratio':>7s}"
    print(header)
    print("-" * len(header))
    for name, call in workloads():
        t_py = timeit(lambda: call(pk), args.repeats)
        if ck is not None:
            t_c = timeit(lambda: call(ck), args.repeats)
            ratio = t_py / t_c
            print(f"{name:34s} {t_py * 1e6:9.1f}u {t_c * 1e6:9.1f}u {ratio:6.2f}x")
        else:
            print(f"{name:34s} {t_py * 1e6:9.1f}u {'-':>10s} {'-':>7s}")


if __name__ == "__main__":
    main()
