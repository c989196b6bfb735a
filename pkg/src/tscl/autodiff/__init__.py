from .gradcheck import GradCheckReport, grad_check
from .ops import (
    avg_pool2,
    batch_norm,
    clip,
    concat_channels,
    conv2d,
    exp,
    gaussian_blur,
    gaussian_taps,
    leaky_relu,
    linear,
    log,
    mean,
    relu,
    sigmoid,
    sqrt,
)
from .tensor import Tensor, as_tensor, is_grad_enabled, no_grad, parameter

__all__ = [
    "Tensor", "as_tensor", "parameter", "no_grad", "is_grad_enabled",
    "conv2d", "batch_norm", "leaky_relu", "sigmoid", "relu", "concat_channels",
    "avg_pool2", "gaussian_blur", "gaussian_taps", "linear", "mean",
    "sqrt", "log", "exp", "clip", "grad_check", "GradCheckReport",
]
