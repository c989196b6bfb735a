"""numba-compiled versions of the hot kernels.

Loop orders mirror :mod:`numpy_impl` so that every output element is
accumulated in the same sequence on both paths.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _im2col(x, cols):
    n, c, h, w = x.shape
    for b in range(n):
        for y in range(h):
            for xx in range(w):
                row = (b * h + y) * w + xx
                for ch in range(c):
                    base = ch * 9
                    for ky in range(3):
                        sy = y + ky - 1
                        for kx in range(3):
                            sx = xx + kx - 1
                            if 0 <= sy < h and 0 <= sx < w:
                                cols[row, base + ky * 3 + kx] = x[b, ch, sy, sx]
                            else:
                                cols[row, base + ky * 3 + kx] = 0.0


@njit(cache=True)
def _col2im(cols, dx, n, c, h, w):
    # gather form: each pixel sums its 9 patch entries in (ky, kx) order
    for b in range(n):
        for y in range(h):
            for xx in range(w):
                for ch in range(c):
                    acc = 0.0
                    for ky in range(3):
                        sy = y + 1 - ky
                        if sy < 0 or sy >= h:
                            continue
                        for kx in range(3):
                            sx = xx + 1 - kx
                            if sx < 0 or sx >= w:
                                continue
                            acc += cols[(b * h + sy) * w + sx, ch * 9 + ky * 3 + kx]
                    dx[b, ch, y, xx] = acc


def im2col3x3(x):
    n, c, h, w = x.shape
    cols = np.empty((n * h * w, c * 9))
    _im2col(np.ascontiguousarray(x), cols)
    return cols


def col2im3x3(cols, n, c, h, w):
    dx = np.empty((n, c, h, w))
    _col2im(np.ascontiguousarray(cols), dx, n, c, h, w)
    return dx


@njit(cache=True)
def _reflect(i, length):
    if i < 0:
        return -i
    if i >= length:
        return 2 * (length - 1) - i
    return i


@njit(cache=True)
def _blur_w(x, taps, out):
    b_, h, w = x.shape
    p = taps.shape[0] // 2
    for b in range(b_):
        for y in range(h):
            for xx in range(w):
                acc = taps[0] * x[b, y, _reflect(xx - p, w)]
                for k in range(1, taps.shape[0]):
                    acc = acc + taps[k] * x[b, y, _reflect(xx + k - p, w)]
                out[b, y, xx] = acc


@njit(cache=True)
def _blur_h(x, taps, out):
    b_, h, w = x.shape
    p = taps.shape[0] // 2
    for b in range(b_):
        for y in range(h):
            for xx in range(w):
                acc = taps[0] * x[b, _reflect(y - p, h), xx]
                for k in range(1, taps.shape[0]):
                    acc = acc + taps[k] * x[b, _reflect(y + k - p, h), xx]
                out[b, y, xx] = acc


@njit(cache=True)
def _spread_w(g, taps, out):
    b_, h, w = g.shape
    t = taps.shape[0]
    p = t // 2
    gp = np.zeros(w + 2 * p)
    for b in range(b_):
        for y in range(h):
            gp[:] = 0.0
            for k in range(t):
                for xx in range(w):
                    gp[k + xx] += taps[k] * g[b, y, xx]
            for xx in range(w):
                out[b, y, xx] = gp[p + xx]
            for i in range(1, p + 1):
                out[b, y, i] += gp[p - i]
            for i in range(p, 0, -1):
                out[b, y, w - 1 - i] += gp[p + w - 1 + i]


@njit(cache=True)
def _spread_h(g, taps, out):
    b_, h, w = g.shape
    t = taps.shape[0]
    p = t // 2
    gp = np.zeros(h + 2 * p)
    for b in range(b_):
        for xx in range(w):
            gp[:] = 0.0
            for k in range(t):
                for y in range(h):
                    gp[k + y] += taps[k] * g[b, y, xx]
            for y in range(h):
                out[b, y, xx] = gp[p + y]
            for i in range(1, p + 1):
                out[b, i, xx] += gp[p - i]
            for i in range(p, 0, -1):
                out[b, h - 1 - i, xx] += gp[p + h - 1 + i]


def blur_w(x, taps):
    out = np.empty(x.shape)
    _blur_w(np.ascontiguousarray(x), taps, out)
    return out


def blur_h(x, taps):
    out = np.empty(x.shape)
    _blur_h(np.ascontiguousarray(x), taps, out)
    return out


def blur_w_adjoint(g, taps):
    out = np.empty(g.shape)
    _spread_w(np.ascontiguousarray(g), taps, out)
    return out


def blur_h_adjoint(g, taps):
    out = np.empty(g.shape)
    _spread_h(np.ascontiguousarray(g), taps, out)
    return out
