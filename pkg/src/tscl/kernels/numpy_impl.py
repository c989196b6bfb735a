"""Pure-numpy versions of the hot kernels."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def im2col3x3(x):
    """(N, C, H, W) -> (N*H*W, C*9) patch matrix for a 3x3, pad-1 convolution.

    Columns are ordered (channel, ky, kx) to match ``weight.reshape(Cout, -1)``.
    """
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(xp, (3, 3), axis=(2, 3))  # N, C, H, W, 3, 3
    return np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5)).reshape(n * h * w, c * 9)


def col2im3x3(cols, n, c, h, w):
    """Adjoint of :func:`im2col3x3`."""
    blocks = cols.reshape(n, h, w, c, 3, 3)
    dxp = np.zeros((n, c, h + 2, w + 2))
    for ky in range(3):
        for kx in range(3):
            dxp[:, :, ky:ky + h, kx:kx + w] += blocks[:, :, :, :, ky, kx].transpose(0, 3, 1, 2)
    return dxp[:, :, 1:h + 1, 1:w + 1].copy()


def _correlate_last(xp, taps, length):
    acc = taps[0] * xp[..., 0:length]
    for k in range(1, taps.shape[0]):
        acc = acc + taps[k] * xp[..., k:k + length]
    return acc


def _spread_last(g, taps):
    p = taps.shape[0] // 2
    length = g.shape[-1]
    gp = np.zeros(g.shape[:-1] + (length + 2 * p,))
    for k in range(taps.shape[0]):
        gp[..., k:k + length] += taps[k] * g
    out = gp[..., p:p + length].copy()
    # fold the reflected margins back onto their source pixels
    if p > 0:
        out[..., 1:p + 1] += gp[..., p - 1::-1]
        out[..., length - 1 - p:length - 1] += gp[..., length + 2 * p - 1:length + p - 1:-1]
    return out


def blur_w(x, taps):
    """Correlate each row of a (B, H, W) array with ``taps`` using reflect padding."""
    p = taps.shape[0] // 2
    xp = np.pad(x, ((0, 0), (0, 0), (p, p)), mode="reflect")
    return _correlate_last(xp, taps, x.shape[2])


def blur_h(x, taps):
    """Same as :func:`blur_w` along the H axis."""
    return np.ascontiguousarray(blur_w(np.ascontiguousarray(x.transpose(0, 2, 1)), taps).transpose(0, 2, 1))


def blur_w_adjoint(g, taps):
    return _spread_last(g, taps)


def blur_h_adjoint(g, taps):
    return np.ascontiguousarray(_spread_last(np.ascontiguousarray(g.transpose(0, 2, 1)), taps).transpose(0, 2, 1))
