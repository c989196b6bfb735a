import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from tscl.kernels import numba_impl, numpy_impl
from tscl.autodiff.ops import gaussian_taps

rng = np.random.default_rng(0)


@pytest.mark.parametrize("shape", [(1, 1, 3, 3), (2, 3, 8, 5), (4, 16, 16, 16)])
def test_im2col_backends_identical(shape):
    x = rng.standard_normal(shape)
    assert numba_impl.im2col3x3(x).tobytes() == numpy_impl.im2col3x3(x).tobytes()
    n, c, h, w = shape
    cols = rng.standard_normal((n * h * w, c * 9))
    assert numba_impl.col2im3x3(cols, n, c, h, w).tobytes() == numpy_impl.col2im3x3(cols, n, c, h, w).tobytes()


@pytest.mark.parametrize("shape", [(1, 6, 6), (3, 16, 12), (5, 32, 32)])
def test_blur_backends_identical(shape):
    taps = gaussian_taps(11, 1.5)
    x = rng.standard_normal(shape)
    for name in ("blur_w", "blur_h", "blur_w_adjoint", "blur_h_adjoint"):
        a = getattr(numba_impl, name)(x, taps)
        b = getattr(numpy_impl, name)(x, taps)
        assert a.tobytes() == b.tobytes(), name


@pytest.mark.parametrize("impl", [numba_impl, numpy_impl])
def test_adjoints_satisfy_dot_product_identity(impl):
    taps = gaussian_taps(11, 1.5)
    x = rng.standard_normal((2, 13, 17))
    y = rng.standard_normal((2, 13, 17))
    assert np.vdot(impl.blur_w(x, taps), y) == pytest.approx(np.vdot(x, impl.blur_w_adjoint(y, taps)), rel=1e-12)
    assert np.vdot(impl.blur_h(x, taps), y) == pytest.approx(np.vdot(x, impl.blur_h_adjoint(y, taps)), rel=1e-12)
    n, c, h, w = 2, 3, 5, 4
    xi = rng.standard_normal((n, c, h, w))
    cols = rng.standard_normal((n * h * w, c * 9))
    assert np.vdot(impl.im2col3x3(xi), cols) == pytest.approx(np.vdot(xi, impl.col2im3x3(cols, n, c, h, w)), rel=1e-12)


def test_env_flag_selects_numpy_backend():
    code = "import tscl.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, TSCL_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["TSCL_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"
