import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import ms_ssim_ref, ssim_ref
from tscl.autodiff import grad_check, sigmoid
from tscl.errors import MetricError, ShapeError
from tscl.metrics import bce, bit_accuracy, encode_loss, ms_ssim, ms_ssim_exponents, psnr, rmse, ssim, total_loss


def pair(seed, shape, noise=0.1):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 1, shape)
    return a, np.clip(a + rng.normal(0, noise, shape), 0, 1)


def test_ssim_self_is_exactly_one():
    a, _ = pair(0, (2, 3, 32, 32))
    assert ssim(a, a).item() == 1.0
    assert ms_ssim(a, a).item() == 1.0
    big, _ = pair(1, (1, 3, 64, 64))
    for s in (1, 2, 3):
        assert ms_ssim(big, big, s).item() == 1.0


def test_ssim_checkerboard_inverse_negative():
    y, x = np.indices((16, 16))
    board = ((x + y) % 2).astype(float)[None, None]
    assert ssim(board, 1 - board).item() < 0


def test_ssim_matches_oracle_seed7():
    a, b = pair(7, (1, 1, 16, 16), noise=0.3)
    assert abs(ssim(a, b).item() - ssim_ref(a, b)) < 1e-9


def test_ms_ssim_matches_pyramid_oracle():
    a, b = pair(3, (1, 2, 32, 32))
    assert abs(ms_ssim(a, b, 3).item() - ms_ssim_ref(a, b, 3)) < 1e-9


def test_ms_ssim_single_scale_is_ssim():
    a, b = pair(5, (2, 3, 16, 16), noise=0.2)
    assert ms_ssim(a, b, 1).item() == ssim(a, b).item()


def test_exponents_renormalized():
    e = ms_ssim_exponents(3)
    assert sum(e) == pytest.approx(1.0, abs=1e-15)
    assert e[0] == pytest.approx(0.0448 / (0.0448 + 0.2856 + 0.3001))
    # the canonical five sum to 1.0001, so even the full set is rescaled
    canonical = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
    assert ms_ssim_exponents(5) == pytest.approx([w / sum(canonical) for w in canonical], abs=1e-15)
    with pytest.raises(MetricError):
        ms_ssim_exponents(6)


def test_too_small_images_rejected():
    a = np.zeros((1, 1, 8, 8))
    with pytest.raises(MetricError, match="window"):
        ssim(a, a)
    b = np.zeros((1, 1, 32, 32))
    with pytest.raises(MetricError, match="scales"):
        ms_ssim(b, b, 4)
    with pytest.raises(ShapeError):
        ssim(np.zeros((1, 1, 16, 16)), np.zeros((1, 1, 16, 17)))


def test_ssim_symmetric():
    a, b = pair(11, (1, 3, 16, 16), noise=0.3)
    assert ssim(a, b).item() == pytest.approx(ssim(b, a).item(), abs=1e-15)
    assert rmse(a, b).item() == rmse(b, a).item()


def test_rmse_psnr_closed_forms():
    a = np.full((1, 3, 8, 8), 0.3)
    assert rmse(a, a).item() == 0.0 and psnr(a, a) == 100.0
    assert rmse(a, a + 0.1).item() == pytest.approx(0.1, abs=1e-15)
    assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-12)
    zero, one = np.zeros((1, 3, 4, 4)), np.ones((1, 3, 4, 4))
    assert rmse(zero, one).item() == 1.0 and psnr(zero, one) == 0.0


def test_bce_cases():
    t = np.random.default_rng(0).integers(0, 2, (4, 5)).astype(float)
    assert bce(np.full((4, 5), 0.5), t).item() == pytest.approx(math.log(2), abs=1e-15)
    assert bce(t, t).item() < 1e-6
    assert bce(np.array([0.9, 0.1]), np.array([1.0, 0.0])).item() == pytest.approx(-math.log(0.9), abs=1e-15)


def test_bce_sigmoid_gradient():
    z = np.random.default_rng(1).normal(0, 2, (3, 7))
    t = np.random.default_rng(2).integers(0, 2, (3, 7)).astype(float)
    assert grad_check(lambda x: bce(sigmoid(x), t), [z], tol=1e-6).passed


def test_encode_loss_zero_and_components():
    a, b = pair(4, (2, 3, 32, 32))
    assert encode_loss(a, a).item() == 0.0
    parts = 0.5 * (1 - ssim(a, b).item()) + 0.5 * (1 - ms_ssim(a, b).item()) + 0.3 * rmse(a, b).item()
    assert abs(encode_loss(a, b).item() - parts) < 1e-12
    assert 0.5 * (1 - 0.9) + 0.5 * (1 - 0.95) + 0.3 * 0.1 == pytest.approx(0.105)


def test_total_loss():
    assert total_loss((1, 1, 1), (0.1, 0.2, 0.3)).item() == pytest.approx(0.6, abs=1e-15)
    assert total_loss((1, 0.8, 0.4), (0.1, 0.2, 0.3)).item() == pytest.approx(0.38, abs=1e-15)
    assert total_loss((0.3, 2, 7), (0, 0, 0)).item() == 0.0


@given(st.floats(0, 10), st.floats(0, 10), st.floats(0, 10), st.floats(0.1, 10))
def test_total_loss_linear_in_weight(w0, w1, w2, k):
    losses = (0.3, 0.7, 1.1)
    base = total_loss((w0, w1, w2), losses).item()
    scaled = total_loss((w0, w1 * k, w2), losses).item()
    assert scaled - base == pytest.approx(0.7 * w1 * (k - 1), abs=1e-9)


def test_bit_accuracy():
    m = np.random.default_rng(0).integers(0, 2, (2, 1, 16, 16)).astype(float)
    assert bit_accuracy(m, m) == 1.0
    assert bit_accuracy(m, 1 - m) == 0.0
    # 0.5 rounds up to 1, so the accuracy is exactly the fraction of ones
    assert bit_accuracy(m, np.full_like(m, 0.5)) == m.mean()
    with pytest.raises(ShapeError):
        bit_accuracy(m, m[:1])


images = arrays(np.float64, (1, 1, 16, 16), elements=st.floats(0, 1))


@given(images, images)
def test_ssim_at_most_one_and_loss_nonnegative(a, b):
    assert ssim(a, b).item() <= 1.0 + 1e-12
    assert encode_loss(np.tile(a, (1, 1, 2, 2)), np.tile(b, (1, 1, 2, 2))).item() >= -1e-12
