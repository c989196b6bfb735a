"""Stage one: epoch-indexed curriculum ramps for the three loss weights.

Each loss gets its own ramp.  Continuous ramps follow a sine, linear,
exponential, or cosine shape between two epochs; discrete schemes add fixed
increments at listed epochs.  The ramp windows are sequential, so emphasis
moves from embedding quality to decoding to steganalysis resistance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple, Union

from .errors import ConfigError

log = logging.getLogger(__name__)

LOSS_IDS = ("encode", "decode", "steganalysis")
KINDS = ("sine", "linear", "exponential", "cosine")
VARIANTS = ("fixed-step-fixed-amp", "fixed-step-free-amp", "free-step-fixed-amp", "free-step-free-amp")

WeightVector = Tuple[float, float, float]


def unit_ramp(kind: str, u: float) -> float:
    """Shape function g(u) on u in [0, 1]."""
    if kind == "sine":
        return math.sin(min(math.pi / 2, u * math.pi / 2))
    if kind == "linear":
        return u
    if kind == "exponential":
        return math.exp(u) - 1.0
    if kind == "cosine":
        # 1 - cos(u*pi/2), written so g(0) = 0 and g(1) = 1 hold exactly
        return 1.0 - math.sin((1.0 - u) * math.pi / 2)
    raise ConfigError(f"unknown ramp kind {kind!r}; expected one of {KINDS}")


@dataclass(frozen=True)
class ContinuousRamp:
    a0: float
    a1: float
    c1: int
    c2: int
    kind: str = "sine"
    a2: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown ramp kind {self.kind!r}; expected one of {KINDS}")
        if int(self.c1) != self.c1 or int(self.c2) != self.c2 or self.c1 < 0:
            raise ConfigError(f"ramp epochs must be non-negative integers, got c1={self.c1}, c2={self.c2}")
        if self.c2 <= self.c1:
            raise ConfigError(f"ramp needs c2 > c1, got c1={self.c1}, c2={self.c2}")
        if self.a0 < 0 or self.a1 < 0 or (self.a2 is not None and self.a2 < 0):
            raise ConfigError(f"ramp weights must be >= 0, got a0={self.a0}, a1={self.a1}, a2={self.a2}")
        if self.a2 is not None and self.a2 != self.a0 + self.a1 * unit_ramp(self.kind, 1.0):
            log.warning("ramp %s: explicit a2=%g overrides the continuous limit %g",
                        self.kind, self.a2, self.a0 + self.a1 * unit_ramp(self.kind, 1.0))

    @property
    def converged(self) -> float:
        """Weight from ``c2`` on (``a2``, defaulting to the continuous limit)."""
        if self.a2 is not None:
            return self.a2
        return self.a0 + self.a1 * unit_ramp(self.kind, 1.0)

    @property
    def window(self) -> Tuple[int, int]:
        return (self.c1, self.c2)


@dataclass(frozen=True)
class DiscreteScheme:
    k1: float
    steps: Tuple[Tuple[int, float], ...] = ()
    variant: str = "free-step-free-amp"

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((int(e), float(d)) for e, d in self.steps))
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown discrete variant {self.variant!r}; expected one of {VARIANTS}")
        if self.k1 < 0:
            raise ConfigError(f"discrete scheme needs k1 >= 0, got {self.k1}")
        epochs = [e for e, _ in self.steps]
        if any(e < 0 for e in epochs):
            raise ConfigError(f"step epochs must be >= 0, got {epochs}")
        if any(b <= a for a, b in zip(epochs, epochs[1:])):
            raise ConfigError(f"step epochs must be strictly increasing, got {epochs}")
        if self.variant.startswith("fixed-step") and len(epochs) > 1:
            gaps = {b - a for a, b in zip(epochs, epochs[1:])}
            if len(gaps) != 1:
                raise ConfigError(f"{self.variant}: step epochs {epochs} are not evenly spaced")
        if self.variant.endswith("fixed-amp") and len({d for _, d in self.steps}) > 1:
            raise ConfigError(f"{self.variant}: deltas {[d for _, d in self.steps]} are not all equal")

    @property
    def window(self) -> Tuple[int, int]:
        if not self.steps:
            return (0, 0)
        return (self.steps[0][0], self.steps[-1][0])


Ramp = Union[ContinuousRamp, DiscreteScheme]


def eval_continuous(ramp: ContinuousRamp, epoch: int) -> float:
    if epoch < 0:
        raise ConfigError(f"epoch must be >= 0, got {epoch}")
    if epoch < ramp.c1:
        return ramp.a0
    if epoch >= ramp.c2:
        return ramp.converged
    u = (epoch - ramp.c1) / (ramp.c2 - ramp.c1)
    return ramp.a0 + ramp.a1 * unit_ramp(ramp.kind, u)


def eval_discrete(scheme: DiscreteScheme, epoch: int) -> float:
    """k1 plus every delta whose step epoch has been reached (right-continuous)."""
    if epoch < 0:
        raise ConfigError(f"epoch must be >= 0, got {epoch}")
    w = scheme.k1
    for step_epoch, delta in scheme.steps:
        if step_epoch > epoch:
            break
        w += delta
    return w


def eval_ramp(ramp: Ramp, epoch: int) -> float:
    if isinstance(ramp, ContinuousRamp):
        return eval_continuous(ramp, epoch)
    return eval_discrete(ramp, epoch)


@dataclass(frozen=True)
class CurriculumConfig:
    encode: Ramp
    decode: Ramp
    steganalysis: Ramp
    normalize_weights: bool = False

    def __post_init__(self):
        bounds: List[int] = []
        for loss_id in LOSS_IDS:
            bounds.extend(getattr(self, loss_id).window)
        if any(b < a for a, b in zip(bounds, bounds[1:])):
            raise ConfigError(
                "ramp windows must be sequential (encode, then decode, then steganalysis); "
                f"got window bounds {bounds}"
            )

    @property
    def ramps(self) -> Dict[str, Ramp]:
        return {k: getattr(self, k) for k in LOSS_IDS}


def curriculum_weights(config: CurriculumConfig, epoch: int) -> WeightVector:
    w = tuple(eval_ramp(getattr(config, k), epoch) for k in LOSS_IDS)
    if config.normalize_weights:
        total = sum(w)
        if total > 0:
            w = tuple(v / total for v in w)
    return w  # type: ignore[return-value]


# -- presets ---------------------------------------------------------------

def default_windows(epochs: int) -> List[Tuple[int, int]]:
    """Ramp windows [0, E/6], [E/6, E/3], [E/3, E/2], forced strictly increasing."""
    if epochs < 4:
        raise ConfigError(f"curriculum presets need at least 4 epochs, got {epochs}")
    bounds = [0]
    for k in (1, 2, 3):
        bounds.append(max(k * epochs // 6, bounds[-1] + 1))
    return [(bounds[i], bounds[i + 1]) for i in range(3)]


def default_curriculum(epochs: int, kind: str = "sine", start: float = 0.2, ceiling: float = 1.0) -> CurriculumConfig:
    """Each loss ramps from ``start`` to ``ceiling`` over its own window."""
    if kind not in KINDS:
        raise ConfigError(f"unknown ramp kind {kind!r}; expected one of {KINDS}")
    amp = (ceiling - start) / unit_ramp(kind, 1.0)
    ramps = [ContinuousRamp(a0=start, a1=amp, c1=c1, c2=c2, kind=kind) for c1, c2 in default_windows(epochs)]
    return CurriculumConfig(*ramps)


# Fractions of each window at which the "free" variants step, and their deltas
# (both sum to the full window / full rise).
_FREE_FRACTIONS = (0.1, 0.35, 0.7, 1.0)
_FREE_DELTAS = (0.4, 0.2, 0.1, 0.1)


def discrete_preset_scheme(variant: str, c1: int, c2: int, start: float = 0.2, ceiling: float = 1.0) -> DiscreteScheme:
    rise = ceiling - start
    length = c2 - c1
    if variant.startswith("fixed-step"):
        gap = max(1, length // 4)
        epochs = [c1 + gap * (i + 1) for i in range(4)]
    else:
        epochs = []
        for f in _FREE_FRACTIONS:
            e = c1 + max(1, round(length * f))
            epochs.append(max(e, epochs[-1] + 1) if epochs else e)
    if variant.endswith("fixed-amp"):
        deltas = [rise / 4] * 4
    else:
        deltas = [rise * d / sum(_FREE_DELTAS) for d in _FREE_DELTAS]
    return DiscreteScheme(k1=start, steps=tuple(zip(epochs, deltas)), variant=variant)


def discrete_curriculum(epochs: int, variant: str) -> CurriculumConfig:
    if variant not in VARIANTS:
        raise ConfigError(f"unknown discrete variant {variant!r}; expected one of {VARIANTS}")
    return CurriculumConfig(*[discrete_preset_scheme(variant, c1, c2) for c1, c2 in default_windows(epochs)])


def ramp_from_dict(spec: dict) -> Ramp:
    """Build one ramp from its config-file form."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        if kind == "discrete":
            steps = spec.pop("steps", [])
            return DiscreteScheme(steps=tuple(tuple(s) for s in steps), **spec)
        return ContinuousRamp(kind=kind, **spec)
    except TypeError as exc:
        raise ConfigError(f"bad ramp spec {spec}: {exc}") from None


def ramp_to_dict(ramp: Ramp) -> dict:
    if isinstance(ramp, DiscreteScheme):
        return {"kind": "discrete", "k1": ramp.k1, "steps": [list(s) for s in ramp.steps], "variant": ramp.variant}
    out = {"kind": ramp.kind, "a0": ramp.a0, "a1": ramp.a1, "c1": ramp.c1, "c2": ramp.c2}
    if ramp.a2 is not None:
        out["a2"] = ramp.a2
    return out


def schedule_table(config: CurriculumConfig, epochs: Iterable[int]) -> List[Tuple[int, float, float, float]]:
    return [(e, *curriculum_weights(config, e)) for e in epochs]
