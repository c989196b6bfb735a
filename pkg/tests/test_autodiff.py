import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tscl.autodiff import (
    Tensor,
    avg_pool2,
    batch_norm,
    concat_channels,
    conv2d,
    gaussian_blur,
    grad_check,
    leaky_relu,
    mean,
    no_grad,
    sigmoid,
)
from tscl.errors import DegenerateBatchError, ShapeError
from tscl.gradsuite import CASES, check_case


def leaf(a):
    return Tensor(np.asarray(a, dtype=float), requires_grad=True)


def conv_inputs(seed=42, n=2, cin=3, cout=4, h=6, w=5):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1, 1, (n, cin, h, w)), rng.uniform(-1, 1, (cout, cin, 3, 3)), rng.uniform(-1, 1, cout)


def brute_conv(x, w, b):
    n, cin, h, wd = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    out = np.zeros((n, w.shape[0], h, wd))
    for i in range(n):
        for o in range(w.shape[0]):
            for y in range(h):
                for xx in range(wd):
                    out[i, o, y, xx] = (xp[i, :, y:y + 3, xx:xx + 3] * w[o]).sum() + b[o]
    return out


# -- conv2d -------------------------------------------------------------------

def test_conv_identity_kernel():
    w = np.zeros((1, 1, 3, 3))
    w[0, 0, 1, 1] = 1
    out = conv2d(Tensor(np.ones((1, 1, 3, 3))), Tensor(w), Tensor(np.zeros(1)))
    assert np.array_equal(out.data, np.ones((1, 1, 3, 3)))


def test_conv_zero_kernel_gives_bias():
    x, _, _ = conv_inputs()
    out = conv2d(Tensor(x), Tensor(np.zeros((4, 3, 3, 3))), Tensor(np.array([0.5, -1, 2, 3.0])))
    assert np.array_equal(out.data, np.broadcast_to(np.array([0.5, -1, 2, 3.0])[None, :, None, None], out.shape))


def test_conv_matches_brute_force():
    x, w, b = conv_inputs(0)
    assert np.allclose(conv2d(Tensor(x), Tensor(w), Tensor(b)).data, brute_conv(x, w, b), atol=1e-13, rtol=0)


def test_conv_grad_wrt_x_seed42():
    x, w, b = conv_inputs(42)
    r = grad_check(lambda t: conv2d(t, Tensor(w), Tensor(b)).sum(), [x], tol=1e-6)
    assert r.passed, r


def test_conv_shape_error_names_shapes():
    with pytest.raises(ShapeError) as info:
        conv2d(Tensor(np.zeros((1, 2, 4, 4))), Tensor(np.zeros((3, 3, 3, 3))), Tensor(np.zeros(3)))
    assert "(1, 2, 4, 4)" in str(info.value) and "(3, 3, 3, 3)" in str(info.value)


# -- batch norm ---------------------------------------------------------------

def test_batch_norm_standardizes():
    rng = np.random.default_rng(0)
    x = rng.normal(5.0, 2.0, (4, 3, 6, 6))
    y = batch_norm(Tensor(x), Tensor(np.ones(3)), Tensor(np.zeros(3))).data
    assert np.allclose(y.mean(axis=(0, 2, 3)), 0, atol=1e-12)
    assert np.allclose(y.var(axis=(0, 2, 3)), 1, atol=1e-4)
    y2 = batch_norm(Tensor(x), Tensor(np.full(3, 2.0)), Tensor(np.full(3, 3.0))).data
    assert np.allclose(y2.mean(axis=(0, 2, 3)), 3, atol=1e-12)
    assert np.allclose(y2.std(axis=(0, 2, 3)), 2, atol=1e-4)


def test_batch_norm_running_stats_and_eval():
    rng = np.random.default_rng(1)
    x = rng.normal(5.0, 2.0, (4, 2, 5, 5))
    rm, rv = np.zeros(2), np.ones(2)
    batch_norm(Tensor(x), Tensor(np.ones(2)), Tensor(np.zeros(2)), rm, rv, training=True)
    m = 4 * 25
    assert np.allclose(rm, 0.1 * x.mean(axis=(0, 2, 3)))
    assert np.allclose(rv, 0.9 + 0.1 * x.var(axis=(0, 2, 3)) * m / (m - 1))
    y = batch_norm(Tensor(x), Tensor(np.ones(2)), Tensor(np.zeros(2)), rm, rv, training=False).data
    assert np.allclose(y, (x - rm[None, :, None, None]) / np.sqrt(rv[None, :, None, None] + 1e-5))


def test_batch_norm_gradient():
    rng = np.random.default_rng(3)
    x, g, b = rng.normal(0, 2, (2, 4, 5, 5)), rng.uniform(0.5, 2, 4), rng.normal(size=4)
    r = rng.normal(size=x.shape)
    rep = grad_check(lambda x, g, b: (batch_norm(x, g, b) * r).sum(), [x, g, b], tol=1e-5)
    assert rep.passed, rep


def test_batch_norm_degenerate():
    with pytest.raises(DegenerateBatchError):
        batch_norm(Tensor(np.ones((1, 2, 1, 1))), Tensor(np.ones(2)), Tensor(np.zeros(2)))


# -- elementwise and structural ----------------------------------------------

def test_leaky_relu_definition():
    assert np.array_equal(leaky_relu(Tensor(np.array([-1.0, 0.0, 2.0]))).data, [-0.01, 0.0, 2.0])
    x = np.random.default_rng(0).normal(size=10)
    assert np.array_equal(leaky_relu(Tensor(x), 1.0).data, x)


def test_leaky_relu_gradient_away_from_kink():
    x = np.random.default_rng(4).normal(size=(3, 20))
    x = x[np.abs(x) >= 1e-3]
    r = np.random.default_rng(5).normal(size=x.shape)
    assert grad_check(lambda t: (leaky_relu(t) * r).sum(), [x], tol=1e-6).passed


def test_leaky_relu_subgradient_at_zero_is_slope():
    t = leaf([0.0])
    leaky_relu(t).sum().backward()
    assert t.grad[0] == 0.01


def test_sigmoid_concat_pool():
    assert sigmoid(Tensor(np.zeros(1))).item() == 0.5
    assert sigmoid(Tensor(np.array([-1000.0, 1000.0]))).data.tolist() == [0.0, 1.0]
    out = concat_channels(Tensor(np.zeros((2, 3, 8, 8))), Tensor(np.ones((2, 1, 8, 8))))
    assert out.shape == (2, 4, 8, 8)
    with pytest.raises(ShapeError):
        concat_channels(Tensor(np.zeros((2, 3, 8, 8))), Tensor(np.ones((2, 1, 4, 4))))
    pooled = avg_pool2(Tensor(np.full((1, 2, 8, 6), 0.7)))
    assert pooled.shape == (1, 2, 4, 3) and np.allclose(pooled.data, 0.7)


def test_gaussian_blur_preserves_constants_and_mass():
    y = gaussian_blur(Tensor(np.full((1, 1, 16, 16), 0.25))).data
    assert np.allclose(y, 0.25, atol=1e-15)
    with pytest.raises(ShapeError):
        gaussian_blur(Tensor(np.zeros((1, 1, 5, 16))))


def test_mean_square_closed_form():
    x = leaf([1.0, 2.0, 3.0])
    mean(x * x).backward()
    assert np.allclose(x.grad, [2 / 3, 4 / 3, 2], atol=1e-15)
    r = grad_check(lambda t: mean(t * t), [np.array([1.0, 2.0, 3.0])], tol=1e-8)
    assert r.passed


# -- graph mechanics ----------------------------------------------------------

def test_gradient_accumulates_over_branches():
    x = leaf([0.5, -1.5, 2.0])
    y = x * x * 3.0 + x * 2.0  # two uses of x, d/dx = 6x + 2
    y.sum().backward()
    assert np.allclose(x.grad, 6 * x.data + 2)


def test_leaf_grad_accumulates_over_backward_calls():
    x = leaf([1.0, 2.0])
    (x * 2.0).sum().backward()
    (x * 3.0).sum().backward()
    assert np.array_equal(x.grad, [5.0, 5.0])


def test_diamond_graph():
    x = leaf([0.3])
    a = sigmoid(x)
    b = a * a
    c = a + b
    c.sum().backward()
    s = 1 / (1 + np.exp(-0.3))
    assert np.allclose(x.grad, (1 + 2 * s) * s * (1 - s))


def test_broadcast_gradients():
    x = leaf(np.ones((2, 3)))
    b = leaf(np.array([1.0, 2.0, 3.0]))
    ((x + b) * b).sum().backward()
    assert np.array_equal(x.grad, np.tile([1.0, 2.0, 3.0], (2, 1)))
    assert np.allclose(b.grad, 2 * (1 + 2 * b.data))


def test_no_grad_builds_no_graph():
    x = leaf([1.0])
    with no_grad():
        y = x * 2.0
    assert not y.requires_grad


def test_forward_determinism():
    x, w, b = conv_inputs(9, h=16, w=12)
    a = gaussian_blur(conv2d(Tensor(x), Tensor(w), Tensor(b)))
    c = gaussian_blur(conv2d(Tensor(x), Tensor(w), Tensor(b)))
    assert a.data.tobytes() == c.data.tobytes()


@given(arrays(np.float64, (2, 3), elements=st.floats(-3, 3)), arrays(np.float64, (2, 3), elements=st.floats(0.5, 3)))
def test_elementwise_algebra_gradients(a, b):
    r = grad_check(lambda x, y: ((x * y - x / y) ** 2.0).sum(), [a, b], tol=1e-4)
    assert r.passed, r


@pytest.mark.filterwarnings("ignore:invalid value encountered:RuntimeWarning")
def test_grad_check_reports_nonfinite():
    r = grad_check(lambda t: (t ** 0.5).sum(), [np.array([0.0, 1.0])], tol=1e-4)
    assert not r.passed


def test_grad_check_flags_wrong_gradient():
    def bad(t):
        return Tensor._make(t.data * 2.0, (t,), lambda g: (g * 3.0,)).sum()

    r = grad_check(bad, [np.array([1.0, 2.0])])
    assert not r.passed and r.failures


@pytest.mark.parametrize("name", [n for n in CASES if n != "encoder_slice"])
def test_suite_case_seed0(name):
    r = check_case(name, 0)
    assert r.passed, r
