"""Cover images and payload bits: PPM files, a synthetic corpus, and splits."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Union

import numpy as np

from .errors import ConfigError, PpmError

SPLITS = ("train", "val", "test")


# -- PPM (P6, maxval 255) ---------------------------------------------------

def _next_token(buf: bytes, pos: int):
    """Return (token, position after token), skipping whitespace and # comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PpmError("unexpected end of header", start)
    return buf[start:pos], pos


def decode_ppm(buf: bytes) -> np.ndarray:
    """Parse binary PPM bytes into a (3, H, W) float array in [0, 1]."""
    magic, pos = _next_token(buf, 0)
    if magic != b"P6":
        raise PpmError(f"unsupported PPM variant {magic!r}; only binary P6 is accepted", 0)
    fields, starts = [], []
    for name in ("width", "height", "maxval"):
        tok, pos = _next_token(buf, pos)
        start = pos - len(tok)
        if not tok.isdigit():
            raise PpmError(f"invalid {name} {tok!r}", start)
        fields.append(int(tok))
        starts.append(start)
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise PpmError(f"invalid dimensions {width}x{height}", starts[0] if width <= 0 else starts[1])
    if maxval != 255:
        raise PpmError(f"unsupported maxval {maxval}; only 255 is accepted", starts[2])
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise PpmError("missing whitespace after maxval", pos)
    pos += 1
    need = width * height * 3
    if len(buf) - pos < need:
        raise PpmError(f"truncated pixel data: need {need} bytes, have {len(buf) - pos}", len(buf))
    pixels = np.frombuffer(buf, dtype=np.uint8, count=need, offset=pos)
    return pixels.reshape(height, width, 3).transpose(2, 0, 1).astype(np.float64) / 255.0


def encode_ppm(image: np.ndarray) -> bytes:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValueError(f"expected a (3, H, W) image, got shape {image.shape}")
    _, h, w = image.shape
    q = np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)
    return f"P6\n{w} {h}\n255\n".encode("ascii") + q.transpose(1, 2, 0).tobytes()


def load_ppm(path: Union[str, os.PathLike]) -> np.ndarray:
    return decode_ppm(Path(path).read_bytes())


def save_ppm(image: np.ndarray, path: Union[str, os.PathLike]) -> None:
    Path(path).write_bytes(encode_ppm(image))


# -- datasets ---------------------------------------------------------------

@dataclass
class Dataset:
    images: np.ndarray  # (count, 3, H, W)
    splits: Dict[str, slice]
    source: str

    def split(self, name: str) -> np.ndarray:
        return self.images[self.splits[name]]

    @property
    def size(self) -> int:
        return self.images.shape[-1]

    def digest(self) -> str:
        h = hashlib.sha256(np.ascontiguousarray(self.images).tobytes())
        for name in SPLITS:
            s = self.splits[name]
            h.update(f"{name}:{s.start}:{s.stop};".encode())
        return h.hexdigest()


def split_ranges(count: int) -> Dict[str, slice]:
    """70/15/15 by index: floor(0.7c) train, floor(0.15c) val, the rest test."""
    n_train = (7 * count) // 10
    n_val = (15 * count) // 100
    return {
        "train": slice(0, n_train),
        "val": slice(n_train, n_train + n_val),
        "test": slice(n_train + n_val, count),
    }


def _smooth_gradient(rng, size, yy, xx):
    angle = rng.uniform(0, 2 * np.pi)
    t = (np.cos(angle) * xx + np.sin(angle) * yy + 1.0) / 2.0
    lo, hi = rng.uniform(0.1, 0.9, 3), rng.uniform(0.1, 0.9, 3)
    return lo[:, None, None] + (hi - lo)[:, None, None] * t[None]


def _band_limited_noise(rng, size, yy, xx, max_freq=4):
    out = np.zeros((3, size, size))
    for c in range(3):
        for _ in range(6):
            fx, fy = rng.integers(-max_freq, max_freq + 1, 2)
            phase = rng.uniform(0, 2 * np.pi)
            out[c] += rng.normal(0, 1) * np.cos(np.pi * (fx * xx + fy * yy) + phase)
    out /= max(np.abs(out).max(), 1e-9)
    return out


def _draw_shapes(rng, img, yy, xx):
    for _ in range(rng.integers(1, 5)):
        color = rng.uniform(0.05, 0.95, 3)[:, None, None]
        cy, cx = rng.uniform(-0.8, 0.8, 2)
        r = rng.uniform(0.15, 0.5)
        kind = rng.integers(0, 3)
        if kind == 0:
            mask = (yy - cy) ** 2 + (xx - cx) ** 2 < r * r
        elif kind == 1:
            mask = (np.abs(yy - cy) < r) & (np.abs(xx - cx) < r * rng.uniform(0.4, 1.0))
        else:
            mask = (yy - cy > -r) & (np.abs(xx - cx) < (yy - cy + r) * 0.6) & (yy - cy < r)
        img = np.where(mask[None], color, img)
    return img


def synth_image(rng: np.random.Generator, size: int) -> np.ndarray:
    """One cover: smooth gradient, random flat shapes, band-limited texture."""
    coords = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    img = _smooth_gradient(rng, size, yy, xx)
    img = _draw_shapes(rng, img, yy, xx)
    img = img + rng.uniform(0.02, 0.12) * _band_limited_noise(rng, size, yy, xx)
    return np.clip(img, 0.0, 1.0)


def synth_corpus(seed: int, count: int, size: int) -> Dataset:
    if count < 10:
        raise ConfigError(f"synthetic corpus needs count >= 10, got {count}")
    if size < 1:
        raise ConfigError(f"image size must be positive, got {size}")
    images = np.stack([synth_image(np.random.default_rng([seed, i]), size) for i in range(count)])
    return Dataset(images, split_ranges(count), "synthetic")


def write_corpus(dataset: Dataset, root: Union[str, os.PathLike]) -> None:
    """Write ``<root>/{train,val,test}/NNNNN.ppm``."""
    root = Path(root)
    for name in SPLITS:
        d = root / name
        d.mkdir(parents=True, exist_ok=True)
        s = dataset.splits[name]
        for i, img in enumerate(dataset.images[s], start=s.start):
            save_ppm(img, d / f"{i:05d}.ppm")


def load_directory(root: Union[str, os.PathLike]) -> Dataset:
    root = Path(root)
    chunks, splits, start = [], {}, 0
    for name in SPLITS:
        files = sorted((root / name).glob("*.ppm"))
        imgs = [load_ppm(p) for p in files]
        chunks.extend(imgs)
        splits[name] = slice(start, start + len(imgs))
        start += len(imgs)
    if not chunks:
        raise ConfigError(f"no .ppm files under {root}/{{train,val,test}}")
    shapes = {im.shape for im in chunks}
    if len(shapes) != 1:
        raise ConfigError(f"images under {root} have mixed shapes {sorted(shapes)}")
    return Dataset(np.stack(chunks), splits, "directory")


# -- payloads ---------------------------------------------------------------

@dataclass(frozen=True)
class PayloadSpec:
    depth: int
    seed: int = 0

    def __post_init__(self):
        if self.depth not in (1, 2, 3):
            raise ConfigError(f"payload depth must be 1, 2 or 3, got {self.depth}")


def payload_bits(rng: np.random.Generator, n: int, depth: int, size: int) -> np.ndarray:
    return rng.integers(0, 2, size=(n, depth, size, size)).astype(np.float64)


def payload_gen(spec: PayloadSpec, n: int, size: int) -> np.ndarray:
    """Fair i.i.d. bits of shape (n, D, size, size), fixed by (seed, n, D, size)."""
    return payload_bits(np.random.default_rng([spec.seed, n, spec.depth, size]), n, spec.depth, size)
