"""Image-quality metrics and the three task losses.

``ssim``, ``ms_ssim``, ``rmse``, ``bce`` and ``encode_loss`` accept and
return :class:`~tscl.autodiff.Tensor` so they can be used as training
losses; plain arrays are wrapped automatically.  ``psnr`` and
``bit_accuracy`` are evaluation-only and return floats.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence, Tuple

import numpy as np

from .autodiff import Tensor, as_tensor, avg_pool2, clip, gaussian_blur, log, relu, sqrt
from .errors import MetricError, ShapeError

SSIM_K1 = 0.01
SSIM_K2 = 0.03
WINDOW = 11
SIGMA = 1.5
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
DEFAULT_SCALES = 3
PSNR_CAP = 100.0
BCE_EPS = 1e-7
ENCODE_FACTORS = (0.5, 0.5, 0.3)  # ssim, ms-ssim, rmse terms


def _check_pair(a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 4:
        raise ShapeError(f"expected NCHW images, got shape {a.shape}")


def _ssim_terms(a: Tensor, b: Tensor, data_range: float = 1.0):
    """Per (image, channel) mean SSIM and mean contrast-structure term."""
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_a = gaussian_blur(a, WINDOW, SIGMA)
    mu_b = gaussian_blur(b, WINDOW, SIGMA)
    mu_aa = mu_a * mu_a
    mu_bb = mu_b * mu_b
    mu_ab = mu_a * mu_b
    s_aa = gaussian_blur(a * a, WINDOW, SIGMA) - mu_aa
    s_bb = gaussian_blur(b * b, WINDOW, SIGMA) - mu_bb
    s_ab = gaussian_blur(a * b, WINDOW, SIGMA) - mu_ab
    cs_map = (s_ab * 2.0 + c2) / (s_aa + s_bb + c2)
    lum_map = (mu_ab * 2.0 + c1) / (mu_aa + mu_bb + c1)
    ssim_map = lum_map * cs_map
    return ssim_map.mean(axis=(2, 3)), cs_map.mean(axis=(2, 3))


def ssim(a, b, data_range: float = 1.0) -> Tensor:
    """Mean local SSIM (Gaussian window 11, sigma 1.5, reflected edges)."""
    a, b = as_tensor(a), as_tensor(b)
    _check_pair(a, b)
    if min(a.shape[2:]) < WINDOW:
        raise MetricError(
            f"image {a.shape[2]}x{a.shape[3]} is smaller than the {WINDOW}x{WINDOW} SSIM window; "
            "use larger images or configure a smaller window"
        )
    per_channel, _ = _ssim_terms(a, b, data_range)
    return per_channel.mean()


def ms_ssim_exponents(scales: int) -> Tuple[float, ...]:
    """Canonical five-scale exponents, truncated to ``scales`` and renormalised."""
    if not 1 <= scales <= len(MS_SSIM_WEIGHTS):
        raise MetricError(f"scales must be in 1..{len(MS_SSIM_WEIGHTS)}, got {scales}")
    w = MS_SSIM_WEIGHTS[:scales]
    total = sum(w)
    return tuple(x / total for x in w)


def ms_ssim(a, b, scales: int = DEFAULT_SCALES, data_range: float = 1.0) -> Tensor:
    """Multi-scale SSIM in product form.

    Contrast-structure terms come from every scale but the coarsest, and the
    full SSIM term from the coarsest; negative terms are clamped to zero
    before the fractional power.  The finest scale must fit the SSIM window;
    coarser scales only need sides greater than ``WINDOW // 2``.
    """
    a, b = as_tensor(a), as_tensor(b)
    _check_pair(a, b)
    exps = ms_ssim_exponents(scales)
    h, w = a.shape[2:]
    if min(h, w) < WINDOW:
        raise MetricError(f"image {h}x{w} is smaller than the {WINDOW}x{WINDOW} SSIM window")
    coarse = min(h, w) >> (scales - 1)
    if coarse <= WINDOW // 2:
        raise MetricError(
            f"{scales} scales reduce a {h}x{w} image to side {coarse}; need > {WINDOW // 2}. Use fewer scales"
        )
    value = None
    for j, e in enumerate(exps):
        full, cs = _ssim_terms(a, b, data_range)
        term = full if j == scales - 1 else cs
        if scales > 1:
            term = relu(term) ** e
        value = term if value is None else value * term
        if j < scales - 1:
            a, b = avg_pool2(a), avg_pool2(b)
    return value.mean()


def rmse(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"shapes differ: {a.shape} vs {b.shape}")
    d = a - b
    return sqrt((d * d).mean())


def psnr(a, b) -> float:
    """PSNR in dB for [0, 1] images, capped at 100 dB."""
    e = float(rmse(np.asarray(getattr(a, "data", a)), np.asarray(getattr(b, "data", b))).data)
    if e < 1e-5:
        return PSNR_CAP
    return min(PSNR_CAP, 20.0 * math.log10(1.0 / e))


def bce(pred, target) -> Tensor:
    """Binary cross entropy; predictions are clamped to [1e-7, 1 - 1e-7]."""
    pred = as_tensor(pred)
    t = np.asarray(getattr(target, "data", target), dtype=np.float64)
    if pred.shape != t.shape:
        raise ShapeError(f"bce shapes differ: {pred.shape} vs {t.shape}")
    p = clip(pred, BCE_EPS, 1.0 - BCE_EPS)
    ll = log(p) * t + log(1.0 - p) * (1.0 - t)
    return -ll.mean()


def encode_loss(cover, stego, scales: int = DEFAULT_SCALES) -> Tensor:
    """0.5 (1 - SSIM) + 0.5 (1 - MS-SSIM) + 0.3 RMSE."""
    f_ssim, f_ms, f_rmse = ENCODE_FACTORS
    return (
        (1.0 - ssim(cover, stego)) * f_ssim
        + (1.0 - ms_ssim(cover, stego, scales)) * f_ms
        + rmse(cover, stego) * f_rmse
    )


def total_loss(weights: Sequence[float], losses: Sequence) -> Tensor:
    """Weighted sum w_E L_E + w_D L_D + w_S L_S (losses may be tensors or floats)."""
    if len(weights) != 3 or len(losses) != 3:
        raise ValueError("total_loss expects three weights and three losses")
    out = as_tensor(losses[0]) * float(weights[0])
    for w, l in zip(weights[1:], losses[1:]):
        out = out + as_tensor(l) * float(w)
    return out


def bit_accuracy(bits, probs) -> float:
    """Fraction of positions where round-half-up(probs) equals bits."""
    m = np.asarray(getattr(bits, "data", bits))
    p = np.asarray(getattr(probs, "data", probs))
    if m.shape != p.shape:
        raise ShapeError(f"bit_accuracy shapes differ: {m.shape} vs {p.shape}")
    decoded = (p >= 0.5).astype(np.float64)
    return float(np.mean(decoded == m))


@dataclass
class MetricReport:
    ssim: float
    msssim: float
    psnr: float
    rmse: float
    bit_accuracy: float
    steg_score: float

    def as_dict(self) -> dict:
        return asdict(self)
