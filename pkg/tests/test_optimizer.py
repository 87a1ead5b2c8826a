import numpy as np
import pytest

from specklecnn import adamax_init, adamax_step, build_network
from specklecnn.errors import ShapeError
from specklecnn.model import TENSOR_NAMES


def tiny_params():
    return build_network(46, 3, seed=0)


def grads_like(params, value=0.0):
    return {name: np.full_like(t, value)
            for name, t in params.tensors.items()}


class TestInit:
    def test_all_zero_moments(self):
        state = adamax_init(tiny_params())
        assert state.t == 0
        for name in TENSOR_NAMES:
            assert not state.m[name].any()
            assert not state.u[name].any()

    def test_shapes_mirror_params(self):
        params = tiny_params()
        state = adamax_init(params)
        for name in TENSOR_NAMES:
            assert state.m[name].shape == params.tensors[name].shape
            assert state.u[name].shape == params.tensors[name].shape

    def test_two_inits_identical(self):
        params = tiny_params()
        a, b = adamax_init(params), adamax_init(params)
        assert a.t == b.t and a.alpha == b.alpha
        for name in TENSOR_NAMES:
            assert np.array_equal(a.m[name], b.m[name])

    def test_defaults(self):
        state = adamax_init(tiny_params())
        assert (state.alpha, state.beta1, state.beta2, state.epsilon) == \
            (0.001, 0.9, 0.999, 1e-8)


class TestStep:
    def test_first_step_magnitude_is_lr(self):
        params = tiny_params()
        state = adamax_init(params, alpha=0.001)
        grads = grads_like(params)
        g = 0.37
        grads["dense2_bias"][:] = g
        before = params.tensors["dense2_bias"].copy()
        adamax_step(params, grads, state)
        delta = params.tensors["dense2_bias"] - before
        # first step: m_hat = g, u = |g|, so |delta| = lr * |g| / (|g|+eps)
        expected = 0.001 * g / (g + 1e-8)
        assert np.allclose(-delta, expected, rtol=1e-6)
        assert state.t == 1

    def test_zero_gradient_is_noop(self):
        params = tiny_params()
        before = {n: t.copy() for n, t in params.tensors.items()}
        state = adamax_init(params)
        adamax_step(params, grads_like(params, 0.0), state)
        for name in TENSOR_NAMES:
            assert np.array_equal(params.tensors[name], before[name])
            assert not state.m[name].any()
            assert not state.u[name].any()

    def test_two_unit_gradient_steps(self):
        # hand-evaluated recurrence: g=1 twice, lr=0.001
        # step1: m=0.1, u=1, bias=0.1  -> delta = -0.001
        # step2: m=0.19, u=1, bias=0.19 -> delta = -0.001
        params = tiny_params()
        params.tensors["dense2_bias"][:] = 0
        state = adamax_init(params, alpha=0.001)
        for _ in range(2):
            adamax_step(params, grads_like(params, 1.0), state)
        theta = params.tensors["dense2_bias"]
        assert np.allclose(theta, -0.002, rtol=1e-4)
        assert np.allclose(state.m["dense2_bias"], 0.19, rtol=1e-6)
        assert np.allclose(state.u["dense2_bias"], 1.0, rtol=1e-6)

    def test_first_step_scale_invariance(self):
        results = {}
        for c in (1.0, 7.5):
            params = tiny_params()
            state = adamax_init(params)
            before = params.tensors["conv1_kernels"].copy()
            grads = grads_like(params)
            grads["conv1_kernels"] = np.random.default_rng(1) \
                .standard_normal(before.shape).astype(np.float32) * c
            adamax_step(params, grads, state)
            results[c] = params.tensors["conv1_kernels"] - before
        assert np.allclose(results[1.0], results[7.5], rtol=1e-4)

    def test_u_never_negative_and_decays_by_beta2(self):
        params = tiny_params()
        state = adamax_init(params, beta2=0.999)
        adamax_step(params, grads_like(params, 2.0), state)
        u1 = state.u["conv1_bias"].copy()
        adamax_step(params, grads_like(params, 0.0), state)
        u2 = state.u["conv1_bias"]
        assert np.allclose(u2, 0.999 * u1)
        assert np.all(u2 >= 0)

    def test_nonfinite_gradient_rejected(self):
        params = tiny_params()
        state = adamax_init(params)
        grads = grads_like(params)
        grads["conv2_bias"][0] = np.nan
        with pytest.raises(FloatingPointError, match="conv2_bias"):
            adamax_step(params, grads, state)

    def test_shape_mismatch_rejected(self):
        params = tiny_params()
        state = adamax_init(params)
        grads = grads_like(params)
        grads["conv1_bias"] = np.zeros(7, dtype=np.float32)
        with pytest.raises(ShapeError, match="conv1_bias"):
            adamax_step(params, grads, state)

    def test_deterministic(self):
        def run():
            params = tiny_params()
            state = adamax_init(params)
            rng = np.random.default_rng(2)
            for _ in range(3):
                grads = {n: rng.standard_normal(t.shape).astype(np.float32)
                         for n, t in params.tensors.items()}
                adamax_step(params, grads, state)
            return params
        a, b = run(), run()
        for name in TENSOR_NAMES:
            assert np.array_equal(a.tensors[name], b.tensors[name])

    def test_elementwise_independence_under_permutation(self):
        rng = np.random.default_rng(3)
        theta = rng.standard_normal(40).astype(np.float32)
        g = rng.standard_normal(40).astype(np.float32)
        perm = rng.permutation(40)

        class Vec:
            def __init__(self, t):
                self.tensors = {"v": t}
                self.dtype = t.dtype

        direct = Vec(theta.copy())
        adamax_step(direct, {"v": g}, adamax_init(direct))

        permuted = Vec(theta[perm].copy())
        adamax_step(permuted, {"v": g[perm]}, adamax_init(permuted))
        unpermuted = np.empty_like(theta)
        unpermuted[perm] = permuted.tensors["v"]
        assert np.array_equal(direct.tensors["v"], unpermuted)
