"""Finite-difference gradient checks for the reverse-mode tape."""
import numpy as np
import pytest

import pharmgen.autodiff as ad
from pharmgen.errors import UnrecordedOperation


def numeric_grad(f, x, eps=1e-6):
    g = np.zeros_like(x, dtype=float)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        xp = x.copy(); xp[idx] += eps
        xm = x.copy(); xm[idx] -= eps
        g[idx] = (f(xp) - f(xm)) / (2 * eps)
        it.iternext()
    return g


def check(build, shape, seed=0, atol=1e-6, rtol=1e-5):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=shape)

    def scalar(v):
        p = ad.parameter(v)
        return float(build(p).value)

    p = ad.parameter(x)
    loss = build(p)
    got = ad.grad(loss, {"x": p})["x"]
    want = numeric_grad(scalar, x)
    np.testing.assert_allclose(got, want, atol=atol, rtol=rtol)


def test_add_mul_power():
    check(lambda x: ad.tsum(x * x + 3.0 * x), (4, 3))
    check(lambda x: ad.tsum(ad.power(x * x + 1.0, 1.5)), (5,))


def test_matmul_and_reshape():
    W = np.arange(12, dtype=float).reshape(3, 4) / 10
    check(lambda x: ad.tsum(ad.matmul(x, ad.constant(W))), (2, 3))
    check(lambda x: ad.tsum(ad.reshape(x, (6, 2)) * 2.0), (3, 4))


def test_swapaxes_concat_getitem():
    check(lambda x: ad.tsum(ad.swapaxes(x, 0, 1) * ad.constant(np.ones((4, 3)))), (3, 4))
    check(lambda x: ad.tsum(ad.concat([x, x * 2.0], axis=0)), (2, 3))
    idx = np.array([0, 2, 2])
    check(lambda x: ad.tsum(x[idx] * 3.0), (4, 2))  # repeated rows accumulate


def test_nonlinearities():
    for fn in (ad.exp, ad.tanh, ad.sigmoid, ad.silu, ad.relu):
        check(lambda x, fn=fn: ad.tsum(fn(x)), (4, 4), seed=3)
    check(lambda x: ad.tsum(ad.log(x * x + 1.0)), (5,))
    check(lambda x: ad.tsum(ad.sqrt(x * x + 0.5)), (5,))


def test_reductions_and_softmax():
    check(lambda x: ad.tmean(x * x), (3, 5))
    check(lambda x: ad.tsum(ad.softmax(x, axis=-1) * ad.constant(np.arange(5.0))), (3, 5))
    check(lambda x: ad.tsum(ad.log_softmax(x, axis=-1) *
                            ad.constant(np.eye(4)[np.array([0, 1, 3])])), (3, 4))


def test_layer_norm_and_where():
    g = np.ones(6); b = np.zeros(6)
    check(lambda x: ad.tsum(ad.layer_norm(x, ad.constant(g), ad.constant(b))), (4, 6),
          atol=1e-5, rtol=1e-4)
    mask = np.array([[1.0, 0.0, 1.0]])
    check(lambda x: ad.tsum(ad.where(mask, x * 2.0, x * -1.0)), (2, 3))


def test_broadcasting_gradients():
    check(lambda x: ad.tsum(x + ad.constant(np.ones((4, 1, 3)))), (3,))
    check(lambda x: ad.tsum(x * ad.constant(np.arange(12.0).reshape(4, 3))), (1, 3))


def test_grad_accumulates_over_reuse():
    x = ad.parameter(np.array([2.0]))
    y = x * x + x * 3.0  # dy/dx = 2x + 3 = 7
    g = ad.grad(ad.tsum(y), {"x": x})["x"]
    assert g[0] == pytest.approx(7.0)


def test_no_grad_blocks_recording():
    x = ad.parameter(np.ones(3))
    with ad.no_grad():
        y = ad.tsum(x * 2.0)
    with pytest.raises(UnrecordedOperation):
        ad.grad(y, {"x": x})


def test_grad_requires_scalar_loss():
    x = ad.parameter(np.ones(3))
    with pytest.raises(UnrecordedOperation):
        ad.grad(x * 2.0, {"x": x})


def test_unused_parameter_gets_zero_gradient():
    x = ad.parameter(np.ones(3))
    y = ad.parameter(np.ones(2))
    g = ad.grad(ad.tsum(x * x), {"x": x, "y": y})
    assert np.allclose(g["y"], 0.0)
