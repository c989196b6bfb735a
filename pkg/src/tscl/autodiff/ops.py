"""Differentiable operations used by the stego networks and the losses."""

from __future__ import annotations

import functools
from typing import Optional

import numpy as np

from .. import kernels
from ..errors import DegenerateBatchError, ShapeError
from .tensor import Tensor, as_tensor


# -- elementwise ----------------------------------------------------------

def sqrt(x: Tensor) -> Tensor:
    out = np.sqrt(x.data)
    return Tensor._make(out, (x,), lambda g: (g * 0.5 / out,))


def log(x: Tensor) -> Tensor:
    d = x.data
    return Tensor._make(np.log(d), (x,), lambda g: (g / d,))


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return Tensor._make(out, (x,), lambda g: (g * out,))


def clip(x: Tensor, lo: float, hi: float) -> Tensor:
    """Clamp to [lo, hi]; the gradient is zero where clamping happened."""
    d = x.data
    inside = (d >= lo) & (d <= hi)
    return Tensor._make(np.clip(d, lo, hi), (x,), lambda g: (g * inside,))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return Tensor._make(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def sigmoid(x: Tensor) -> Tensor:
    d = x.data
    # split by sign so exp never overflows
    e = np.exp(-np.abs(d))
    out = np.where(d >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return Tensor._make(out, (x,), lambda g: (g * out * (1.0 - out),))


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    """x for x > 0, slope * x otherwise (the subgradient at 0 is ``slope``)."""
    d = x.data
    pos = d > 0
    scale = np.where(pos, 1.0, slope)
    return Tensor._make(d * scale, (x,), lambda g: (g * scale,))


# -- structure ------------------------------------------------------------

def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 4 or b.ndim != 4:
        raise ShapeError(f"concat_channels expects NCHW tensors, got {a.shape} and {b.shape}")
    if (a.shape[0], a.shape[2], a.shape[3]) != (b.shape[0], b.shape[2], b.shape[3]):
        raise ShapeError(f"concat_channels needs matching N, H, W: {a.shape} vs {b.shape}")
    ca = a.shape[1]
    out = np.concatenate([a.data, b.data], axis=1)
    return Tensor._make(out, (a, b), lambda g: (g[:, :ca], g[:, ca:]))


def avg_pool2(x: Tensor) -> Tensor:
    """2x2 mean pooling with stride 2 (odd trailing rows/cols are dropped)."""
    n, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    if h2 == 0 or w2 == 0:
        raise ShapeError(f"avg_pool2 needs H, W >= 2, got {x.shape}")
    crop = x.data[:, :, : 2 * h2, : 2 * w2]
    out = crop.reshape(n, c, h2, 2, w2, 2).mean(axis=(3, 5))

    def backward(g):
        gx = np.zeros(x.shape)
        gx[:, :, : 2 * h2, : 2 * w2] = np.repeat(np.repeat(g, 2, axis=2), 2, axis=3) * 0.25
        return (gx,)

    return Tensor._make(out, (x,), backward)


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """(N, Fin) @ weight.T + bias with weight of shape (Fout, Fin)."""
    return x @ weight.transpose(1, 0) + bias


# -- convolution ----------------------------------------------------------

def conv2d(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """3x3 cross-correlation, stride 1, zero padding 1."""
    if x.ndim != 4:
        raise ShapeError(f"conv2d input must be NCHW, got shape {x.shape}")
    if weight.ndim != 4 or weight.shape[2:] != (3, 3) or weight.shape[1] != x.shape[1]:
        raise ShapeError(f"conv2d weight shape {weight.shape} does not fit input shape {x.shape}")
    if bias.shape != (weight.shape[0],):
        raise ShapeError(f"conv2d bias shape {bias.shape} does not fit weight shape {weight.shape}")
    n, cin, h, w = x.shape
    cout = weight.shape[0]
    cols = kernels.im2col3x3(x.data)
    wm = weight.data.reshape(cout, cin * 9)
    out = (cols @ wm.T + bias.data).reshape(n, h, w, cout).transpose(0, 3, 1, 2)

    def backward(g):
        gm = g.transpose(0, 2, 3, 1).reshape(n * h * w, cout)
        gx = kernels.col2im3x3(gm @ wm, n, cin, h, w) if x.requires_grad else None
        gw = (gm.T @ cols).reshape(weight.shape) if weight.requires_grad else None
        gb = gm.sum(axis=0) if bias.requires_grad else None
        return gx, gw, gb

    return Tensor._make(np.ascontiguousarray(out), (x, weight, bias), backward)


# -- batch norm -----------------------------------------------------------

def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: Optional[np.ndarray] = None,
    running_var: Optional[np.ndarray] = None,
    training: bool = True,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """Per-channel batch normalisation over (N, H, W).

    In training mode the batch statistics are used and, when running buffers
    are given, they are updated in place (unbiased variance, like PyTorch).
    In eval mode the running buffers are used and must be given.
    """
    n, c, h, w = x.shape
    m = n * h * w
    g4 = gamma.data.reshape(1, c, 1, 1)
    b4 = beta.data.reshape(1, c, 1, 1)

    if not training:
        if running_mean is None or running_var is None:
            raise ValueError("eval-mode batch_norm requires running statistics")
        inv = 1.0 / np.sqrt(running_var.reshape(1, c, 1, 1) + eps)
        xhat = (x.data - running_mean.reshape(1, c, 1, 1)) * inv

        def backward_eval(g):
            return g * g4 * inv, (g * xhat).sum(axis=(0, 2, 3)), g.sum(axis=(0, 2, 3))

        return Tensor._make(xhat * g4 + b4, (x, gamma, beta), backward_eval)

    if m <= 1:
        raise DegenerateBatchError(f"batch_norm in training mode needs more than one value per channel, got {x.shape}")
    mu = x.data.mean(axis=(0, 2, 3), keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=(0, 2, 3), keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    if running_mean is not None and running_var is not None:
        running_mean *= 1.0 - momentum
        running_mean += momentum * mu.reshape(c)
        running_var *= 1.0 - momentum
        running_var += momentum * var.reshape(c) * (m / (m - 1))

    def backward(g):
        dxhat = g * g4
        s1 = dxhat.sum(axis=(0, 2, 3), keepdims=True)
        s2 = (dxhat * xhat).sum(axis=(0, 2, 3), keepdims=True)
        gx = (inv / m) * (m * dxhat - s1 - xhat * s2)
        return gx, (g * xhat).sum(axis=(0, 2, 3)), g.sum(axis=(0, 2, 3))

    return Tensor._make(xhat * g4 + b4, (x, gamma, beta), backward)


# -- gaussian blur --------------------------------------------------------

@functools.lru_cache(maxsize=16)
def gaussian_taps(window: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Normalised 1-D Gaussian window; the 2-D window is its outer product."""
    r = np.arange(window, dtype=np.float64) - (window - 1) / 2.0
    g = np.exp(-(r * r) / (2.0 * sigma * sigma))
    g /= g.sum()
    g.flags.writeable = False
    return g


def gaussian_blur(x: Tensor, window: int = 11, sigma: float = 1.5) -> Tensor:
    """Depthwise separable Gaussian blur with reflected edges (output keeps H, W).

    Each spatial side must exceed ``window // 2`` so the padding is a single
    reflection.
    """
    if window % 2 != 1:
        raise ValueError(f"window must be odd, got {window}")
    n, c, h, w = x.shape
    pad = window // 2
    if h <= pad or w <= pad:
        raise ShapeError(f"gaussian_blur with window {window} needs H, W > {pad}, got {x.shape}")
    taps = gaussian_taps(window, float(sigma))
    flat = x.data.reshape(n * c, h, w)
    out = kernels.blur_h(kernels.blur_w(flat, taps), taps).reshape(n, c, h, w)

    def backward(g):
        gf = g.reshape(n * c, h, w)
        return (kernels.blur_w_adjoint(kernels.blur_h_adjoint(gf, taps), taps).reshape(n, c, h, w),)

    return Tensor._make(out, (x,), backward)


def mean(x: Tensor) -> Tensor:
    return as_tensor(x).mean()
