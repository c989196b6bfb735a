"""Central finite-difference checking of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .tensor import Tensor, no_grad

# Relative error denominators are floored here so coordinates whose true
# gradient is ~0 are judged on absolute error instead of amplified noise.
DENOM_FLOOR = 1e-4


@dataclass
class GradCheckReport:
    max_rel_error: float
    tol: float
    checked: int
    failures: list = field(default_factory=list)  # (input index, flat coordinate, analytic, numeric, rel err)
    nonfinite: list = field(default_factory=list)  # (input index, flat coordinate, which)

    @property
    def passed(self) -> bool:
        return not self.nonfinite and self.max_rel_error < self.tol

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        msg = f"{status} max_rel_err={self.max_rel_error:.3e} tol={self.tol:g} coords={self.checked}"
        if self.nonfinite:
            msg += f" nonfinite={self.nonfinite[:5]}"
        if self.failures:
            msg += f" worst={self.failures[:3]}"
        return msg


def relative_error(analytic, numeric, floor: float = DENOM_FLOOR):
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / denom


def grad_check(
    fn: Callable[..., Tensor],
    inputs: Sequence[np.ndarray],
    h: float = 1e-5,
    tol: float = 1e-4,
    coords: Optional[Sequence[Optional[np.ndarray]]] = None,
    floor: float = DENOM_FLOOR,
) -> GradCheckReport:
    """Compare reverse-mode gradients of a scalar closure against central differences.

    ``fn`` receives one :class:`Tensor` per entry of ``inputs`` and must return
    a scalar tensor.  ``coords`` optionally restricts, per input, which flat
    coordinates are perturbed (``None`` means all of them).
    """
    arrays = [np.array(a, dtype=np.float64) for a in inputs]
    leaves = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    out = fn(*leaves)
    if out.size != 1:
        raise ValueError(f"grad_check needs a scalar closure, got shape {out.shape}")
    out.backward()

    def f_at():
        with no_grad():
            return float(fn(*[Tensor(a) for a in arrays]).data)

    report = GradCheckReport(max_rel_error=0.0, tol=tol, checked=0)
    for i, (arr, leaf) in enumerate(zip(arrays, leaves)):
        analytic = leaf.grad if leaf.grad is not None else np.zeros_like(arr)
        idx = np.arange(arr.size) if coords is None or coords[i] is None else np.asarray(coords[i])
        for j in idx:
            j = int(j)
            orig = arr.flat[j]
            arr.flat[j] = orig + h
            f_plus = f_at()
            arr.flat[j] = orig - h
            f_minus = f_at()
            arr.flat[j] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            a = float(analytic.flat[j])
            report.checked += 1
            if not np.isfinite(a):
                report.nonfinite.append((i, j, "analytic"))
                continue
            if not np.isfinite(numeric):
                report.nonfinite.append((i, j, "numeric"))
                continue
            err = float(relative_error(a, numeric, floor))
            report.max_rel_error = max(report.max_rel_error, err)
            if err >= tol:
                report.failures.append((i, j, a, numeric, err))
    report.failures.sort(key=lambda r: -r[4])
    return report
