"""Adam and gradient clipping contracts."""

import numpy as np
import pytest

from taskembed.nn import Adam, Tensor, clip_grad_norm, parameter


def test_adam_zero_gradient_no_change():
    p = parameter(np.array([1.0, 2.0]))
    opt = Adam([("p", p)], lr=0.1)
    before = p.data.copy()
    opt.step()
    assert np.array_equal(p.data, before)


def test_adam_first_step_sign_normalized():
    # t=1 bias correction makes the step ~ -lr * g / (|g| + eps)
    g = 0.37
    lr, eps = 5e-4, 1e-3
    p = parameter(np.array([1.0]))
    p.grad[...] = g
    opt = Adam([("p", p)], lr=lr, eps=eps)
    opt.step()
    expected = 1.0 - lr * g / (abs(g) + eps)
    assert np.allclose(p.data, [expected], atol=1e-15)


def test_adam_deterministic():
    def run():
        p = parameter(np.array([0.3, -0.7]))
        opt = Adam([("p", p)], lr=1e-2)
        for i in range(10):
            p.grad[...] = np.array([0.1 * i, -0.2])
            opt.step()
        return p.data.copy()

    assert np.array_equal(run(), run())


def test_adam_state_roundtrip():
    p = parameter(np.array([0.5]))
    opt = Adam([("p", p)], lr=1e-2)
    p.grad[...] = 0.3
    opt.step()
    state = opt.state_dict()

    q = parameter(p.data.copy())
    opt2 = Adam([("p", q)], lr=1e-2)
    opt2.load_state_dict(state)
    p.grad[...] = -0.1
    q.grad[...] = -0.1
    opt.step()
    opt2.step()
    assert np.array_equal(p.data, q.data)


def test_clip_below_threshold_unchanged():
    p = parameter(np.zeros(2))
    p.grad[...] = [0.3, 0.0]
    norm = clip_grad_norm([("p", p)], 0.5)
    assert norm == pytest.approx(0.3)
    assert np.allclose(p.grad, [0.3, 0.0])


def test_clip_above_threshold_scales():
    p = parameter(np.zeros(2))
    p.grad[...] = [1.0, 0.0]
    clip_grad_norm([("p", p)], 0.5)
    assert np.allclose(p.grad, [0.5, 0.0])


def test_clip_property_postcondition():
    rng = np.random.default_rng(5)
    for _ in range(50):
        params = [(f"p{i}", parameter(np.zeros(rng.integers(1, 6)))) for i in range(3)]
        for _, p in params:
            p.grad[...] = rng.standard_normal(p.data.shape) * rng.uniform(0, 4)
        max_norm = float(rng.uniform(0.1, 2.0))
        clip_grad_norm(params, max_norm)
        post = np.sqrt(sum(float((p.grad ** 2).sum()) for _, p in params))
        assert post <= max_norm + 1e-9


def test_clip_rejects_nonpositive_max_norm():
    p = parameter(np.zeros(1))
    with pytest.raises(ValueError):
        clip_grad_norm([("p", p)], 0.0)
