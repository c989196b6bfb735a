"""Independent reference implementations used as test oracles.

Written from the textbook definitions with explicit loops and index
arithmetic; they share no code with the package.
"""

import math

import numpy as np

K1, K2 = 0.01, 0.03
WIN, SIG = 11, 1.5
CANONICAL = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)


def window_2d(win=WIN, sigma=SIG):
    r = [i - (win - 1) / 2 for i in range(win)]
    g = [math.exp(-(v * v) / (2 * sigma * sigma)) for v in r]
    s = sum(g)
    g = [v / s for v in g]
    return np.array([[gy * gx for gx in g] for gy in g])


def _reflect(i, n):
    # mirror about the edge pixel without repeating it: -1 -> 1, n -> n-2
    if i < 0:
        return -i
    if i >= n:
        return 2 * (n - 1) - i
    return i


def local_stats(a, b):
    """Windowed mu_a, mu_b, E[a^2], E[b^2], E[ab] at every pixel of 2-D a, b."""
    h, w = a.shape
    k = window_2d()
    p = WIN // 2
    out = np.zeros((5, h, w))
    for y in range(h):
        for x in range(w):
            ys = [_reflect(y + dy, h) for dy in range(-p, p + 1)]
            xs = [_reflect(x + dx, w) for dx in range(-p, p + 1)]
            pa = a[np.ix_(ys, xs)]
            pb = b[np.ix_(ys, xs)]
            out[:, y, x] = [(k * pa).sum(), (k * pb).sum(), (k * pa * pa).sum(), (k * pb * pb).sum(), (k * pa * pb).sum()]
    return out


def ssim_and_cs_2d(a, b):
    c1, c2 = K1 ** 2, K2 ** 2
    ma, mb, eaa, ebb, eab = local_stats(a, b)
    va, vb, cov = eaa - ma * ma, ebb - mb * mb, eab - ma * mb
    cs = (2 * cov + c2) / (va + vb + c2)
    lum = (2 * ma * mb + c1) / (ma * ma + mb * mb + c1)
    return float((lum * cs).mean()), float(cs.mean())


def ssim_ref(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    vals = [ssim_and_cs_2d(a[n, c], b[n, c])[0] for n in range(a.shape[0]) for c in range(a.shape[1])]
    return float(np.mean(vals))


def _halve(img):
    h, w = img.shape
    out = np.zeros((h // 2, w // 2))
    for y in range(h // 2):
        for x in range(w // 2):
            out[y, x] = (img[2 * y, 2 * x] + img[2 * y, 2 * x + 1] + img[2 * y + 1, 2 * x] + img[2 * y + 1, 2 * x + 1]) / 4
    return out


def ms_ssim_ref(a, b, scales=3):
    a, b = np.asarray(a, float), np.asarray(b, float)
    w = CANONICAL[:scales]
    w = [v / sum(w) for v in w]
    vals = []
    for n in range(a.shape[0]):
        for c in range(a.shape[1]):
            x, y = a[n, c], b[n, c]
            prod = 1.0
            for j in range(scales):
                s, cs = ssim_and_cs_2d(x, y)
                term = s if j == scales - 1 else cs
                prod *= max(term, 0.0) ** w[j] if scales > 1 else term
                x, y = _halve(x), _halve(y)
            vals.append(prod)
    return float(np.mean(vals))
