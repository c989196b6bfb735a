"""Experiment configuration: dataclasses loaded from strict JSON.

Unknown keys anywhere in the file are rejected.  The full schema with every
default is what :func:`TrainConfig.to_dict` returns (``tscl train
--print-config`` prints it).
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from .dynamics import DynamicsParams, PriorCoeffs
from .errors import ConfigError
from .scheduler import (
    KINDS,
    LOSS_IDS,
    VARIANTS,
    ContinuousRamp,
    CurriculumConfig,
    default_curriculum,
    discrete_curriculum,
    ramp_from_dict,
)

MODES = ("fixed-baseline", "curriculum-only", "dynamics-only", "tscl")
PRESETS = KINDS + VARIANTS + ("custom",)


@dataclass
class DataConfig:
    source: str = "synthetic"
    root: Optional[str] = None
    seed: int = 1
    count: int = 200
    size: int = 32

    def validate(self) -> None:
        if self.source not in ("synthetic", "directory"):
            raise ConfigError(f"data.source must be 'synthetic' or 'directory', got {self.source!r}")
        if self.source == "directory" and not self.root:
            raise ConfigError("data.root is required when data.source is 'directory'")
        if self.source == "synthetic" and self.count < 10:
            raise ConfigError(f"data.count must be >= 10, got {self.count}")
        if self.size < 16 or self.size & (self.size - 1):
            raise ConfigError(f"data.size must be a power of two >= 16, got {self.size}")


@dataclass
class ScheduleConfig:
    preset: str = "sine"
    ramps: Optional[Dict[str, Dict[str, Any]]] = None
    normalize_weights: bool = False

    def validate(self) -> None:
        if self.preset not in PRESETS:
            raise ConfigError(f"schedule.preset must be one of {PRESETS}, got {self.preset!r}")
        if self.preset == "custom":
            if not self.ramps or set(self.ramps) != set(LOSS_IDS):
                raise ConfigError(f"schedule.ramps must define exactly {LOSS_IDS} for the custom preset")
        elif self.ramps is not None:
            raise ConfigError("schedule.ramps is only allowed with preset 'custom'")

    def build(self, epochs: int) -> CurriculumConfig:
        if self.preset in KINDS:
            cur = default_curriculum(epochs, self.preset)
        elif self.preset in VARIANTS:
            cur = discrete_curriculum(epochs, self.preset)
        else:
            cur = CurriculumConfig(*[ramp_from_dict(self.ramps[k]) for k in LOSS_IDS])
        if self.normalize_weights:
            cur = dataclasses.replace(cur, normalize_weights=True)
        return cur


@dataclass
class DynamicsConfig:
    handoff_epoch: Optional[int] = None
    priors: List[float] = field(default_factory=lambda: [1.0, 0.8, 0.4])
    eps: float = 1e-8
    ratio_min: float = 0.25
    ratio_max: float = 4.0
    weight_floor: float = 0.05
    weight_ceiling: float = 2.0

    def build(self) -> DynamicsParams:
        if len(self.priors) != 3:
            raise ConfigError(f"dynamics.priors needs three values, got {self.priors}")
        return DynamicsParams(
            priors=PriorCoeffs(*self.priors),
            eps=self.eps,
            ratio_min=self.ratio_min,
            ratio_max=self.ratio_max,
            weight_floor=self.weight_floor,
            weight_ceiling=self.weight_ceiling,
        )


@dataclass
class OptimConfig:
    adam_lr: float = 1e-3
    adam_betas: List[float] = field(default_factory=lambda: [0.9, 0.999])
    adam_eps: float = 1e-8
    sgd_lr: float = 1e-4 / 3
    sgd_weight_decay: float = 1e-8
    steg_update_every: int = 5


@dataclass
class TrainConfig:
    data: DataConfig = field(default_factory=DataConfig)
    depth: int = 1
    batch_size: int = 8
    epochs: int = 40
    seed: int = 1
    mode: str = "tscl"
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    optim: OptimConfig = field(default_factory=OptimConfig)
    msssim_scales: int = 3
    output_dir: str = "runs/default"
    save_checkpoints: bool = True

    def validate(self) -> "TrainConfig":
        self.data.validate()
        self.schedule.validate()
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.depth not in (1, 2, 3):
            raise ConfigError(f"depth must be 1, 2 or 3, got {self.depth}")
        if self.epochs < 4:
            raise ConfigError(f"epochs must be >= 4, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.optim.steg_update_every < 1:
            raise ConfigError(f"optim.steg_update_every must be >= 1, got {self.optim.steg_update_every}")
        if not 1 <= self.msssim_scales <= 5 or (self.data.size >> (self.msssim_scales - 1)) <= 5:
            raise ConfigError(
                f"msssim_scales={self.msssim_scales} does not fit {self.data.size}px images "
                "(each halving must leave more than 5 px); use fewer scales"
            )
        if self.dynamics.handoff_epoch is not None and self.dynamics.handoff_epoch < 0:
            raise ConfigError(f"dynamics.handoff_epoch must be >= 0, got {self.dynamics.handoff_epoch}")
        self.dynamics.build()
        self.schedule.build(self.epochs)
        return self

    def handoff(self) -> int:
        """Epoch at which the dynamics stage takes over, after mode overrides."""
        if self.mode in ("fixed-baseline", "curriculum-only"):
            return self.epochs
        if self.mode == "dynamics-only":
            return 0
        h = self.dynamics.handoff_epoch
        return self.epochs // 2 if h is None else h

    def curriculum(self) -> CurriculumConfig:
        if self.mode == "fixed-baseline":
            # plain unweighted sum: three constant unit ramps
            return CurriculumConfig(*[ContinuousRamp(a0=1.0, a1=0.0, c1=i, c2=i + 1, kind="linear") for i in range(3)])
        return self.schedule.build(self.epochs)

    def resolved_output_dir(self) -> Path:
        return Path(os.environ.get("TSCL_OUT") or self.output_dir)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainConfig":
        return _from_dict(cls, raw, "").validate()

    @classmethod
    def load(cls, path) -> "TrainConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw)


def _from_dict(cls, raw, prefix: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"{prefix or 'config'} must be an object, got {type(raw).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(prefix + k for k in unknown)}")
    kwargs = {}
    for name, value in raw.items():
        f = fields[name]
        default = f.default_factory() if f.default_factory is not dataclasses.MISSING else f.default
        if dataclasses.is_dataclass(default):
            kwargs[name] = _from_dict(type(default), value, f"{prefix}{name}.")
        else:
            _check_type(prefix + name, default, value)
            kwargs[name] = value
    return cls(**kwargs)


def _check_type(key: str, default, value) -> None:
    if value is None or default is None:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError(f"{key} must be of type {type(default).__name__}, got {value!r}")
