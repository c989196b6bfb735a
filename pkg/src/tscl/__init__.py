"""Two-stage curriculum loss scheduling for multi-loss image steganography training."""

from .dynamics import DynamicsParams, LossHistory, PriorCoeffs, TsclState, dynamic_weights, loss_ratio
from .kernels import BACKEND
from .scheduler import (
    ContinuousRamp,
    CurriculumConfig,
    DiscreteScheme,
    curriculum_weights,
    default_curriculum,
    eval_continuous,
    eval_discrete,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ContinuousRamp",
    "DiscreteScheme",
    "CurriculumConfig",
    "eval_continuous",
    "eval_discrete",
    "curriculum_weights",
    "default_curriculum",
    "LossHistory",
    "PriorCoeffs",
    "DynamicsParams",
    "TsclState",
    "loss_ratio",
    "dynamic_weights",
]
