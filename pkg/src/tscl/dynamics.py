"""Stage two: loss-dynamics weighting, plus the two-stage state machine.

In the dynamics stage each weight is the loss's recent decline ratio
``L(t-1) / L(t-2)`` multiplied by a fixed prior coefficient.  A ratio above
one means the loss is stalling, so that task is pushed harder next epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .errors import ConfigError
from .scheduler import LOSS_IDS, CurriculumConfig, WeightVector, curriculum_weights

NEUTRAL_RATIO = 1.0


@dataclass(frozen=True)
class PriorCoeffs:
    encode: float = 1.0
    decode: float = 0.8
    steganalysis: float = 0.4

    def __post_init__(self):
        vals = (self.encode, self.decode, self.steganalysis)
        if any(not math.isfinite(v) or v <= 0 for v in vals):
            raise ConfigError(f"prior coefficients must be finite and > 0, got {vals}")
        if not (self.encode > self.decode > self.steganalysis):
            raise ConfigError(f"prior coefficients must satisfy encode > decode > steganalysis, got {vals}")

    def as_tuple(self) -> WeightVector:
        return (self.encode, self.decode, self.steganalysis)


@dataclass(frozen=True)
class DynamicsParams:
    priors: PriorCoeffs = field(default_factory=PriorCoeffs)
    eps: float = 1e-8
    ratio_min: float = 0.25
    ratio_max: float = 4.0
    weight_floor: float = 0.05
    weight_ceiling: float = 2.0

    def __post_init__(self):
        if not 0 < self.ratio_min <= NEUTRAL_RATIO <= self.ratio_max:
            raise ConfigError(f"ratio clamp must satisfy 0 < min <= 1 <= max, got [{self.ratio_min}, {self.ratio_max}]")
        if not 0 <= self.weight_floor <= self.weight_ceiling:
            raise ConfigError(f"weight clamp must satisfy 0 <= floor <= ceiling, got [{self.weight_floor}, {self.weight_ceiling}]")
        if self.eps <= 0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")


class LossHistory:
    """Append-only per-epoch raw losses, one sequence per loss id."""

    def __init__(self, rows: Sequence[Sequence[float]] = ()):
        self._series: Dict[str, List[float]] = {k: [] for k in LOSS_IDS}
        for row in rows:
            self.append(row)

    @classmethod
    def from_series(cls, encode, decode, steganalysis) -> "LossHistory":
        if not len(encode) == len(decode) == len(steganalysis):
            raise ValueError("loss series must have equal lengths")
        return cls(list(zip(encode, decode, steganalysis)))

    def append(self, losses: Sequence[float]) -> None:
        if len(losses) != 3:
            raise ValueError(f"expected a loss triple, got {losses!r}")
        values = [float(v) for v in losses]
        for k, v in zip(LOSS_IDS, values):
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{k} loss must be finite and >= 0, got {v}")
        for k, v in zip(LOSS_IDS, values):
            self._series[k].append(v)

    def series(self, loss_id: str) -> List[float]:
        return list(self._series[loss_id])

    def __len__(self) -> int:
        return len(self._series["encode"])

    def value(self, loss_id: str, t: int) -> float:
        return self._series[loss_id][t]


def loss_ratio(history: LossHistory, loss_id: str, t: int, params: DynamicsParams = DynamicsParams()) -> float:
    """Decline ratio L(t-1) / L(t-2), neutral without two epochs of history, clamped."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t < 2 or len(history) < t:
        return NEUTRAL_RATIO
    num = history.value(loss_id, t - 1)
    den = history.value(loss_id, t - 2)
    if den > params.eps:
        r = num / den
    elif num > params.eps:
        # loss rose from ~0: treat as maximally stalled
        r = params.ratio_max
    else:
        r = NEUTRAL_RATIO
    return min(max(r, params.ratio_min), params.ratio_max)


def _clamp_weight(w: float, params: DynamicsParams) -> float:
    return min(max(w, params.weight_floor), params.weight_ceiling)


def dynamic_weights(history: LossHistory, t: int, params: DynamicsParams = DynamicsParams()) -> WeightVector:
    priors = params.priors.as_tuple()
    return tuple(  # type: ignore[return-value]
        _clamp_weight(d * loss_ratio(history, k, t, params), params) for k, d in zip(LOSS_IDS, priors)
    )


def weights_from_ratios(ratios: Sequence[float], params: DynamicsParams = DynamicsParams()) -> WeightVector:
    """Prior-scaled, clamped weights for already-computed ratios."""
    return tuple(_clamp_weight(d * r, params) for d, r in zip(params.priors.as_tuple(), ratios))  # type: ignore


class TsclState:
    """Two-stage controller: curriculum before ``handoff_epoch``, loss dynamics after.

    Owned by a single training loop.  ``next_weights`` appends the previous
    epoch's raw losses (when given) and returns the weights for ``epoch``.
    """

    def __init__(
        self,
        curriculum: CurriculumConfig,
        handoff_epoch: int,
        params: DynamicsParams = DynamicsParams(),
        history: Optional[LossHistory] = None,
    ):
        if handoff_epoch < 0:
            raise ConfigError(f"handoff_epoch must be >= 0, got {handoff_epoch}")
        self.curriculum = curriculum
        self.handoff_epoch = int(handoff_epoch)
        self.params = params
        self.history = history if history is not None else LossHistory()
        self.emitted: List[WeightVector] = []
        self._check_curriculum_range()

    def _check_curriculum_range(self) -> None:
        lo, hi = self.params.weight_floor, self.params.weight_ceiling
        # ramps only change inside their windows, so scanning up to the last
        # window bound (or the handoff) covers every value stage one can emit
        last = max(max(r.window) for r in self.curriculum.ramps.values()) + 1
        for epoch in range(min(self.handoff_epoch, last)):
            w = curriculum_weights(self.curriculum, epoch)
            if any(not lo <= v <= hi for v in w):
                raise ConfigError(f"curriculum weight {w} at epoch {epoch} is outside [{lo}, {hi}]")

    def stage(self, epoch: int) -> str:
        return "curriculum" if epoch < self.handoff_epoch else "dynamics"

    def next_weights(self, epoch: int, last_epoch_losses: Optional[Sequence[float]] = None) -> WeightVector:
        if last_epoch_losses is not None:
            self.history.append(last_epoch_losses)
        if epoch < self.handoff_epoch:
            w = curriculum_weights(self.curriculum, epoch)
        else:
            w = dynamic_weights(self.history, len(self.history), self.params)
        self.emitted.append(w)
        return w
