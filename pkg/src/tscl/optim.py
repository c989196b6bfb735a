"""Adam for the encoder/decoder and plain SGD for the steganalyzer."""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from .autodiff import Tensor
from .errors import NumericError


def _check_finite(params: Sequence[Tensor]) -> None:
    for i, p in enumerate(params):
        if p.grad is not None and not np.all(np.isfinite(p.grad)):
            raise NumericError(f"non-finite gradient for parameter {p.name or i} with shape {p.shape}")


class Adam:
    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3, betas=(0.9, 0.999), eps: float = 1e-8):
        if lr <= 0:
            raise ValueError(f"lr must be > 0, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        """Bias-corrected Adam update; parameters without a gradient see a zero gradient."""
        _check_finite(self.params)
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def state_arrays(self) -> List[np.ndarray]:
        return self.m + self.v

    def load_state_arrays(self, arrays: Sequence[np.ndarray], step: int) -> None:
        n = len(self.params)
        if len(arrays) != 2 * n:
            raise ValueError(f"expected {2 * n} Adam state arrays, got {len(arrays)}")
        self.m = [a.copy() for a in arrays[:n]]
        self.v = [a.copy() for a in arrays[n:]]
        self.step_count = step


class SGD:
    """p <- p - lr * (g + weight_decay * p)."""

    def __init__(self, params: Sequence[Tensor], lr: float = 1e-4 / 3, weight_decay: float = 1e-8):
        if lr <= 0:
            raise ValueError(f"lr must be > 0, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.weight_decay = weight_decay

    def step(self) -> None:
        _check_finite(self.params)
        for p in self.params:
            g = p.grad if p.grad is not None else 0.0
            p.data -= self.lr * (g + self.weight_decay * p.data)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None
