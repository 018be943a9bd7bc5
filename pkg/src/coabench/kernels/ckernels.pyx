# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.

Same contracts as pykernels: integer kernels bit-identical, gauss_valid
bit-identical (same tap accumulation order), conv/locally-connected equal
to rounding error.
"""

import numpy as np

from libc.stdint cimport int64_t, uint8_t, uint64_t

from ..errors import InvalidBound

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t _next(uint64_t* state) nogil:
    state[0] = state[0] + GAMMA
    return _mix(state[0])


cdef inline uint64_t _next_bounded(uint64_t* state, uint64_t m) nogil:
    # limit = 2^64 - (2^64 mod m); rem == 0 means every draw is accepted
    cdef uint64_t rem = (0 - m) % m
    cdef uint64_t limit = 0 - rem
    cdef uint64_t v
    while True:
        v = _next(state)
        if rem == 0 or v < limit:
            return v % m


def sm64_u64s(seed, n):
    if n < 0:
        raise ValueError("n must be >= 0")
    cdef uint64_t state = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    for i in range(n):
        o[i] = _next(&state)
    return out


def sm64_bits(seed, n):
    if n < 0:
        raise ValueError("n must be >= 0")
    cdef uint64_t state = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(n, dtype=np.uint8)
    cdef uint8_t[::1] o = out
    cdef Py_ssize_t i
    for i in range(n):
        o[i] = <uint8_t> (_next(&state) >> 63)
    return out


def sm64_bounded(seed, n, m):
    if m < 1:
        raise InvalidBound(f"bound must be >= 1, got {m}")
    cdef uint64_t state = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t bound = <uint64_t> m
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    for i in range(n):
        o[i] = _next_bounded(&state, bound)
    return out


def sm64_perm(seed, k):
    if k < 1:
        raise InvalidBound(f"permutation size must be >= 1, got {k}")
    cdef uint64_t state = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    out = np.arange(k, dtype=np.int64)
    cdef int64_t[::1] p = out
    cdef Py_ssize_t i
    cdef int64_t j, tmp
    for i in range(k - 1, 0, -1):
        j = <int64_t> _next_bounded(&state, <uint64_t> (i + 1))
        tmp = p[i]
        p[i] = p[j]
        p[j] = tmp
    return out


# source channel feeding each output channel, lexicographic order
cdef int64_t[6][3] PERM_TAB = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
cdef int64_t[6][3] PERM_INV = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [2, 0, 1], [1, 2, 0], [2, 1, 0]]


def pixelwise_apply(px, flips, perm_idx, decrypt):
    cdef const uint8_t[:, ::1] p = np.ascontiguousarray(px, dtype=np.uint8)
    cdef const uint8_t[:, ::1] f = np.ascontiguousarray(flips, dtype=np.uint8)
    cdef const uint8_t[::1] s = np.ascontiguousarray(perm_idx, dtype=np.uint8)
    cdef Py_ssize_t n = p.shape[0]
    out = np.empty((n, 3), dtype=np.uint8)
    cdef uint8_t[:, ::1] o = out
    cdef bint dec = bool(decrypt)
    cdef Py_ssize_t i, c
    cdef uint8_t v
    cdef int64_t* row
    for i in range(n):
        if dec:
            row = PERM_INV[s[i]]
            for c in range(3):
                v = p[i, row[c]]
                o[i, c] = (255 - v) if f[i, c] else v
        else:
            row = PERM_TAB[s[i]]
            for c in range(3):
                v = p[i, row[c]]
                o[i, c] = (255 - v) if f[i, row[c]] else v
    return out


def blockwise_apply(nibbles, bits, perm, decrypt):
    cdef const uint8_t[:, ::1] nib = np.ascontiguousarray(nibbles, dtype=np.uint8)
    cdef const uint8_t[::1] b = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef const int64_t[::1] pm = np.ascontiguousarray(perm, dtype=np.int64)
    cdef Py_ssize_t nblocks = nib.shape[0]
    cdef Py_ssize_t width = nib.shape[1]
    out = np.empty((nblocks, width), dtype=np.uint8)
    cdef uint8_t[:, ::1] o = out
    cdef bint dec = bool(decrypt)
    cdef Py_ssize_t i, j
    cdef uint8_t v
    for i in range(nblocks):
        if dec:
            for j in range(width):
                v = nib[i, j]
                o[i, pm[j]] = (15 - v) if b[pm[j]] else v
        else:
            for j in range(width):
                v = nib[i, pm[j]]
                o[i, j] = (15 - v) if b[pm[j]] else v
    return out


def gauss_valid(img, kernel):
    cdef const double[:, ::1] x = np.ascontiguousarray(img, dtype=np.float64)
    cdef const double[::1] k = np.ascontiguousarray(kernel, dtype=np.float64)
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1], t = k.shape[0]
    cdef Py_ssize_t cols = w - t + 1, rows = h - t + 1
    tmp_arr = np.empty((h, cols), dtype=np.float64)
    out_arr = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, i
    cdef double acc
    for r in range(h):
        for c in range(cols):
            acc = k[0] * x[r, c]
            for i in range(1, t):
                acc = acc + k[i] * x[r, c + i]
            tmp[r, c] = acc
    for r in range(rows):
        for c in range(cols):
            acc = k[0] * tmp[r, c]
            for i in range(1, t):
                acc = acc + k[i] * tmp[r + i, c]
            out[r, c] = acc
    return out_arr


def conv2d_fwd(x, w, b, sh, sw, ph, pw):
    cdef const double[:, :, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t bsz = xv.shape[0], cin = xv.shape[1], h = xv.shape[2], wid = xv.shape[3]
    cdef Py_ssize_t cout = wv.shape[0], kh = wv.shape[2], kw = wv.shape[3]
    cdef Py_ssize_t ish = sh, isw = sw, iph = ph, ipw = pw
    cdef Py_ssize_t ho = (h + 2 * iph - kh) // ish + 1
    cdef Py_ssize_t wo = (wid + 2 * ipw - kw) // isw + 1
    y_arr = np.empty((bsz, cout, ho, wo), dtype=np.float64)
    cdef double[:, :, :, ::1] y = y_arr
    cdef Py_ssize_t n, o, r, c, ci, i, j, rr, cc
    cdef double acc
    for n in range(bsz):
        for o in range(cout):
            for r in range(ho):
                for c in range(wo):
                    acc = bv[o]
                    for ci in range(cin):
                        for i in range(kh):
                            rr = r * ish + i - iph
                            if rr < 0 or rr >= h:
                                continue
                            for j in range(kw):
                                cc = c * isw + j - ipw
                                if cc < 0 or cc >= wid:
                                    continue
                                acc += wv[o, ci, i, j] * xv[n, ci, rr, cc]
                    y[n, o, r, c] = acc
    return y_arr


def conv2d_bwd(x, w, gy, sh, sw, ph, pw):
    cdef const double[:, :, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[:, :, :, ::1] gv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef Py_ssize_t bsz = xv.shape[0], cin = xv.shape[1], h = xv.shape[2], wid = xv.shape[3]
    cdef Py_ssize_t cout = wv.shape[0], kh = wv.shape[2], kw = wv.shape[3]
    cdef Py_ssize_t ho = gv.shape[2], wo = gv.shape[3]
    cdef Py_ssize_t ish = sh, isw = sw, iph = ph, ipw = pw
    gx_arr = np.zeros((bsz, cin, h, wid), dtype=np.float64)
    gw_arr = np.zeros((cout, cin, kh, kw), dtype=np.float64)
    gb_arr = np.zeros(cout, dtype=np.float64)
    cdef double[:, :, :, ::1] gx = gx_arr
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef Py_ssize_t n, o, r, c, ci, i, j, rr, cc
    cdef double g
    for n in range(bsz):
        for o in range(cout):
            for r in range(ho):
                for c in range(wo):
                    g = gv[n, o, r, c]
                    gb[o] += g
                    for ci in range(cin):
                        for i in range(kh):
                            rr = r * ish + i - iph
                            if rr < 0 or rr >= h:
                                continue
                            for j in range(kw):
                                cc = c * isw + j - ipw
                                if cc < 0 or cc >= wid:
                                    continue
                                gw[o, ci, i, j] += g * xv[n, ci, rr, cc]
                                gx[n, ci, rr, cc] += g * wv[o, ci, i, j]
    return gx_arr, gw_arr, gb_arr


def lc1x1_fwd(x, w, b):
    cdef const double[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t bsz = xv.shape[0], cin = xv.shape[1], npx = xv.shape[2]
    cdef Py_ssize_t cout = wv.shape[1]
    y_arr = np.empty((bsz, cout, npx), dtype=np.float64)
    cdef double[:, :, ::1] y = y_arr
    cdef Py_ssize_t n, p, o, i
    cdef double acc
    for n in range(bsz):
        for p in range(npx):
            for o in range(cout):
                acc = bv[p, o]
                for i in range(cin):
                    acc += wv[p, o, i] * xv[n, i, p]
                y[n, o, p] = acc
    return y_arr


def lc1x1_bwd(x, w, gy):
    cdef const double[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[:, :, ::1] gv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef Py_ssize_t bsz = xv.shape[0], cin = xv.shape[1], npx = xv.shape[2]
    cdef Py_ssize_t cout = wv.shape[1]
    gx_arr = np.zeros((bsz, cin, npx), dtype=np.float64)
    gw_arr = np.zeros((npx, cout, cin), dtype=np.float64)
    gb_arr = np.zeros((npx, cout), dtype=np.float64)
    cdef double[:, :, ::1] gx = gx_arr
    cdef double[:, :, ::1] gw = gw_arr
    cdef double[:, ::1] gb = gb_arr
    cdef Py_ssize_t n, p, o, i
    cdef double g
    for n in range(bsz):
        for p in range(npx):
            for o in range(cout):
                g = gv[n, o, p]
                gb[p, o] += g
                for i in range(cin):
                    gw[p, o, i] += g * xv[n, i, p]
                    gx[n, i, p] += g * wv[p, o, i]
    return gx_arr, gw_arr, gb_arr
