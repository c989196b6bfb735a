"""Encoder, decoder and steganalyzer networks built from 3x3 conv blocks."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .autodiff import (
    Tensor,
    avg_pool2,
    batch_norm,
    concat_channels,
    conv2d,
    leaky_relu,
    linear,
    parameter,
    sigmoid,
)
from .errors import ConfigError, ShapeError

LEAKY_SLOPE = 0.01
BN_MOMENTUM = 0.1

ENCODER_WIDTHS = (32, 32, 64, 64, 64, 32, 32, 16)  # hidden widths; in = 3 + D, out = 3
DECODER_WIDTHS = (32, 64, 64, 32)  # in = 3, out = D
STEG_WIDTHS = (16, 32, 64, 64)  # in = 3, then global pool and affine to 1
STEG_POOL_AFTER = (0, 1, 2)  # 2x2 average pooling after these steganalyzer blocks


def encoder_plan(depth: int) -> Tuple[int, ...]:
    return (3 + depth, *ENCODER_WIDTHS, 3)


def decoder_plan(depth: int) -> Tuple[int, ...]:
    return (3, *DECODER_WIDTHS, depth)


def steg_plan() -> Tuple[int, ...]:
    return (3, *STEG_WIDTHS)


@dataclass
class ConvBlock:
    weight: Tensor
    bias: Tensor
    gamma: Optional[Tensor] = None
    beta: Optional[Tensor] = None
    running_mean: Optional[np.ndarray] = None
    running_var: Optional[np.ndarray] = None

    @property
    def has_bn(self) -> bool:
        return self.gamma is not None

    def params(self) -> List[Tensor]:
        out = [self.weight, self.bias]
        if self.has_bn:
            out += [self.gamma, self.beta]
        return out

    def forward(self, x: Tensor, training: bool, update_stats: bool = True) -> Tensor:
        y = conv2d(x, self.weight, self.bias)
        if not self.has_bn:
            return y
        stats = (self.running_mean, self.running_var) if (update_stats or not training) else (None, None)
        y = batch_norm(y, self.gamma, self.beta, *stats, training=training, momentum=BN_MOMENTUM)
        return leaky_relu(y, LEAKY_SLOPE)


@dataclass
class Network:
    """An ordered stack of conv blocks with a sigmoid head."""

    kind: str
    plan: Tuple[int, ...]
    blocks: List[ConvBlock]
    head_weight: Optional[Tensor] = None  # steganalyzer affine layer
    head_bias: Optional[Tensor] = None

    def params(self) -> List[Tensor]:
        out = [p for b in self.blocks for p in b.params()]
        if self.head_weight is not None:
            out += [self.head_weight, self.head_bias]
        return out

    def named_arrays(self) -> List[Tuple[str, np.ndarray]]:
        """Every parameter and buffer in declaration order."""
        items = []
        for i, b in enumerate(self.blocks):
            items += [(f"{self.kind}.{i}.weight", b.weight.data), (f"{self.kind}.{i}.bias", b.bias.data)]
            if b.has_bn:
                items += [
                    (f"{self.kind}.{i}.gamma", b.gamma.data),
                    (f"{self.kind}.{i}.beta", b.beta.data),
                    (f"{self.kind}.{i}.running_mean", b.running_mean),
                    (f"{self.kind}.{i}.running_var", b.running_var),
                ]
        if self.head_weight is not None:
            items += [(f"{self.kind}.head.weight", self.head_weight.data), (f"{self.kind}.head.bias", self.head_bias.data)]
        return items

    def zero_grad(self) -> None:
        for p in self.params():
            p.grad = None


def kaiming_std(fan_in: int, slope: float = LEAKY_SLOPE) -> float:
    gain = np.sqrt(2.0 / (1.0 + slope * slope))
    return float(gain / np.sqrt(fan_in))


def _conv_block(rng: np.random.Generator, cin: int, cout: int, name: str, bn: bool = True) -> ConvBlock:
    fan_in = cin * 9
    bound = kaiming_std(fan_in) * np.sqrt(3.0)
    block = ConvBlock(
        weight=parameter(rng.uniform(-bound, bound, (cout, cin, 3, 3)), f"{name}.weight"),
        bias=parameter(np.zeros(cout), f"{name}.bias"),
    )
    if bn:
        block.gamma = parameter(np.ones(cout), f"{name}.gamma")
        block.beta = parameter(np.zeros(cout), f"{name}.beta")
        block.running_mean = np.zeros(cout)
        block.running_var = np.ones(cout)
    return block


def _build(rng: np.random.Generator, kind: str, plan: Sequence[int], bn_last: bool) -> List[ConvBlock]:
    n = len(plan) - 1
    return [
        _conv_block(rng, plan[i], plan[i + 1], f"{kind}.{i}", bn=(i < n - 1 or bn_last))
        for i in range(n)
    ]


@dataclass
class StegoModels:
    depth: int
    size: int
    encoder: Network
    decoder: Network
    steganalyzer: Network

    @property
    def networks(self) -> Tuple[Network, Network, Network]:
        return (self.encoder, self.decoder, self.steganalyzer)

    def named_arrays(self) -> List[Tuple[str, np.ndarray]]:
        return [item for net in self.networks for item in net.named_arrays()]

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.named_arrays()}


def init_params(seed: int, depth: int = 1, size: int = 32) -> StegoModels:
    """Kaiming-uniform conv weights (LeakyReLU gain), zero biases, BN gamma=1 beta=0."""
    if depth not in (1, 2, 3):
        raise ConfigError(f"payload depth must be 1, 2 or 3, got {depth}")
    if size < 16 or size & (size - 1):
        raise ConfigError(f"image size must be a power of two >= 16, got {size}")
    rng = np.random.default_rng(seed)
    enc_plan, dec_plan, s_plan = encoder_plan(depth), decoder_plan(depth), steg_plan()
    encoder = Network("encoder", enc_plan, _build(rng, "encoder", enc_plan, bn_last=False))
    decoder = Network("decoder", dec_plan, _build(rng, "decoder", dec_plan, bn_last=False))
    steg = Network("steganalyzer", s_plan, _build(rng, "steganalyzer", s_plan, bn_last=True))
    fan_in = s_plan[-1]
    bound = np.sqrt(3.0) / np.sqrt(fan_in)
    steg.head_weight = parameter(rng.uniform(-bound, bound, (1, fan_in)), "steganalyzer.head.weight")
    steg.head_bias = parameter(np.zeros(1), "steganalyzer.head.bias")
    return StegoModels(depth, size, encoder, decoder, steg)


def _check_channels(net: Network, x: Tensor) -> None:
    if x.ndim != 4 or x.shape[1] != net.plan[0]:
        raise ShapeError(f"{net.kind} expects {net.plan[0]} input channels, got input shape {x.shape}")


def _run_blocks(net: Network, x: Tensor, training: bool, update_stats: bool) -> Tensor:
    for b in net.blocks:
        x = b.forward(x, training, update_stats)
    return x


def encoder_forward(net: Network, cover, payload, training: bool = True, update_stats: bool = True) -> Tensor:
    """C' = E(C, M): cover and payload concatenated along channels, sigmoid output."""
    x = concat_channels(_as(cover), _as(payload))
    _check_channels(net, x)
    return sigmoid(_run_blocks(net, x, training, update_stats))


def decoder_forward(net: Network, stego, training: bool = True, update_stats: bool = True) -> Tensor:
    """M' = D(C') as per-bit probabilities."""
    x = _as(stego)
    _check_channels(net, x)
    return sigmoid(_run_blocks(net, x, training, update_stats))


def steganalyzer_forward(net: Network, images, training: bool = True, update_stats: bool = True) -> Tensor:
    """One score in (0, 1) per image; values near 1 mean "contains a payload"."""
    x = _as(images)
    _check_channels(net, x)
    for i, b in enumerate(net.blocks):
        x = b.forward(x, training, update_stats)
        if i in STEG_POOL_AFTER:
            x = avg_pool2(x)
    pooled = x.mean(axis=(2, 3))
    return sigmoid(linear(pooled, net.head_weight, net.head_bias)).reshape(-1)


def _as(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


# -- checkpoints ----------------------------------------------------------

MAGIC = b"TSCL"
FORMAT_VERSION = 1


def _write_u32s(f: BinaryIO, values: Sequence[int]) -> None:
    f.write(struct.pack(f"<{len(values)}I", *values))


def _read_u32s(f: BinaryIO, n: int) -> Tuple[int, ...]:
    raw = f.read(4 * n)
    if len(raw) != 4 * n:
        raise ValueError("truncated checkpoint header")
    return struct.unpack(f"<{n}I", raw)


def save_checkpoint(
    path,
    models: StegoModels,
    optimizer_state: Optional[Sequence[np.ndarray]] = None,
    optimizer_step: int = 0,
) -> None:
    """Write the versioned binary checkpoint.

    Layout (little-endian): ``TSCL`` magic, u32 version, u32 depth, u32 size,
    then for encoder/decoder/steganalyzer a u32 plan length followed by the
    u32 channel plan; then every parameter and BN buffer as raw float64 in
    declaration order; then a u32 optimizer-step count, a u32 count of
    optimizer arrays and those arrays as raw float64 (shapes follow from the
    parameters they shadow).
    """
    opt = list(optimizer_state or [])
    with open(path, "wb") as f:
        f.write(MAGIC)
        _write_u32s(f, (FORMAT_VERSION, models.depth, models.size))
        for net in models.networks:
            _write_u32s(f, (len(net.plan),))
            _write_u32s(f, net.plan)
        for _, arr in models.named_arrays():
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        _write_u32s(f, (optimizer_step, len(opt)))
        for arr in opt:
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path, optimizer_shapes: Optional[Sequence[tuple]] = None):
    """Read a checkpoint; returns (models, optimizer_step, optimizer arrays)."""
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise ValueError(f"{path}: not a TSCL checkpoint (bad magic)")
        version, depth, size = _read_u32s(f, 3)
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        plans = []
        for _ in range(3):
            (n,) = _read_u32s(f, 1)
            plans.append(_read_u32s(f, n))
        models = init_params(0, depth, size)
        expected = (encoder_plan(depth), decoder_plan(depth), steg_plan())
        if tuple(plans) != expected:
            raise ValueError(f"{path}: channel plan {plans} does not match this build {expected}")
        for _, arr in models.named_arrays():
            raw = f.read(arr.size * 8)
            if len(raw) != arr.size * 8:
                raise ValueError(f"{path}: truncated parameter data")
            arr[...] = np.frombuffer(raw, dtype="<f8").reshape(arr.shape)
        step, count = _read_u32s(f, 2)
        opt = []
        if count:
            if optimizer_shapes is None or len(optimizer_shapes) != count:
                raise ValueError(f"{path}: {count} optimizer arrays present but no matching shapes given")
            for shape in optimizer_shapes:
                size_ = int(np.prod(shape))
                raw = f.read(size_ * 8)
                if len(raw) != size_ * 8:
                    raise ValueError(f"{path}: truncated optimizer data")
                opt.append(np.frombuffer(raw, dtype="<f8").reshape(shape).copy())
    return models, step, opt
