"""Hot inner loops, with a numba path and a pure-numpy fallback.

The numba kernels are used when numba imports cleanly and the environment
variable ``TSCL_DISABLE_NUMBA`` is unset (or ``0``).  Both paths perform
the floating point additions in the same order, so they agree bit for bit.
"""

import os

from . import numpy_impl

_disabled = os.environ.get("TSCL_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

BACKEND = "numpy"
_impl = numpy_impl
if not _disabled:
    try:
        from . import numba_impl as _impl  # noqa: F811

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dependency in practice
        _impl = numpy_impl

im2col3x3 = _impl.im2col3x3
col2im3x3 = _impl.col2im3x3
blur_w = _impl.blur_w
blur_h = _impl.blur_h
blur_w_adjoint = _impl.blur_w_adjoint
blur_h_adjoint = _impl.blur_h_adjoint

__all__ = [
    "BACKEND",
    "im2col3x3",
    "col2im3x3",
    "blur_w",
    "blur_h",
    "blur_w_adjoint",
    "blur_h_adjoint",
]
