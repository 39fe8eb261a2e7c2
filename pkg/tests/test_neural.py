import math

import numpy as np
import pytest

from rlfolio.errors import GradInvalid, ShapeError
from rlfolio.neural import (Adam, GaussianPolicy, Mlp, flatten_params,
                            load_params, save_params, unflatten_params)

import oracles


class TestMlpForward:
    @pytest.mark.parametrize("seed", range(10))
    def test_matches_matrix_oracle(self, seed):
        rng = np.random.default_rng(seed)
        net = Mlp([4, 8, 8, 3], rng)
        x = rng.normal(size=(7, 4))
        expected = oracles.mlp_forward_oracle(net.params, x, net.n_layers)
        np.testing.assert_allclose(net.forward(x), expected, atol=1e-12)

    def test_hand_example_linear(self):
        net = Mlp([2, 1])
        net.params[0][:] = [[2.0], [3.0]]
        net.params[1][:] = [0.5]
        assert net.forward([1.0, -1.0]) == pytest.approx([-0.5])

    def test_hand_example_tanh_hidden(self):
        net = Mlp([1, 1, 1])
        net.params[0][:] = [[1.0]]
        net.params[1][:] = [0.0]
        net.params[2][:] = [[2.0]]
        net.params[3][:] = [1.0]
        assert net.forward([0.5]) == pytest.approx([2 * math.tanh(0.5) + 1])

    def test_single_and_batch_agree(self):
        net = Mlp([3, 5, 2], np.random.default_rng(1))
        x = np.random.default_rng(2).normal(size=(4, 3))
        batch = net.forward(x)
        for i in range(4):
            np.testing.assert_allclose(net.forward(x[i]), batch[i])

    def test_bad_shape(self):
        net = Mlp([3, 2])
        with pytest.raises(ShapeError):
            net.forward(np.zeros(4))
        with pytest.raises(ShapeError):
            Mlp([5])

    def test_clone_independent(self):
        net = Mlp([2, 3, 1], np.random.default_rng(3))
        other = net.clone()
        other.params[0][:] = 0.0
        assert np.any(net.params[0] != 0.0)


class TestMlpBackward:
    @pytest.mark.parametrize("seed", range(5))
    def test_param_grads_finite_difference(self, seed):
        rng = np.random.default_rng(seed)
        net = Mlp([3, 6, 2], rng)
        x = rng.normal(size=(5, 3))
        w = rng.normal(size=(5, 2))

        def loss(flat):
            probe = net.clone()
            unflatten_params(flat, probe.params)
            return float((probe.forward(x) * w).sum())

        _, cache = net.forward_cache(x)
        grads, _ = net.backward(cache, w)
        fd = oracles.finite_difference(loss, flatten_params(net.params))
        np.testing.assert_allclose(flatten_params(grads), fd, atol=1e-6)

    def test_input_grad_finite_difference(self):
        rng = np.random.default_rng(11)
        net = Mlp([3, 4, 2], rng)
        x0 = rng.normal(size=3)
        w = rng.normal(size=2)

        def loss(xflat):
            return float((net.forward(xflat) * w).sum())

        _, cache = net.forward_cache(x0)
        _, in_grad = net.backward(cache, w)
        fd = oracles.finite_difference(loss, x0.copy())
        np.testing.assert_allclose(in_grad, fd, atol=1e-6)


class TestAdam:
    def test_first_step_is_signed_lr(self):
        # bias correction makes the first update exactly lr * sign(g)
        p = np.array([1.0, -2.0])
        opt = Adam(lr=0.01)
        opt.step([p], [np.array([0.3, -0.7])])
        np.testing.assert_allclose(p, [1.0 - 0.01, -2.0 + 0.01], atol=1e-6)

    def test_two_steps_hand_computed(self):
        p = np.array([0.0])
        opt = Adam(lr=0.1, beta1=0.9, beta2=0.999, eps=0.0)
        g1, g2 = 2.0, 1.0
        opt.step([p], [np.array([g1])])
        m = 0.1 * g1
        v = 0.001 * g1 * g1
        expect = -0.1 * (m / 0.1) / math.sqrt(v / 0.001)
        assert p[0] == pytest.approx(expect)
        opt.step([p], [np.array([g2])])
        m = 0.9 * m + 0.1 * g2
        v = 0.999 * v + 0.001 * g2 * g2
        expect -= 0.1 * (m / (1 - 0.9 ** 2)) / math.sqrt(v / (1 - 0.999 ** 2))
        assert p[0] == pytest.approx(expect)

    def test_converges_on_quadratic(self):
        p = np.array([5.0])
        opt = Adam(lr=0.1)
        for _ in range(500):
            opt.step([p], [2.0 * p])
        assert abs(p[0]) < 1e-2

    def test_nonfinite_grad_rejected_and_param_untouched(self):
        p = np.array([1.0])
        opt = Adam(lr=0.1)
        with pytest.raises(GradInvalid):
            opt.step([p], [np.array([np.nan])])
        assert p[0] == 1.0
        assert opt.step_count == 0

    def test_shape_mismatch(self):
        opt = Adam()
        with pytest.raises(ShapeError):
            opt.step([np.zeros(2)], [np.zeros(3)])


class TestGaussianPolicy:
    def test_sample_statistics(self):
        pol = GaussianPolicy(2, 3, hidden=(8,), rng=np.random.default_rng(0))
        obs = np.array([0.3, -0.2])
        mean = pol.mean_net.forward(obs)
        rng = np.random.default_rng(42)
        draws = np.array([pol.sample(obs, rng)[0] for _ in range(4000)])
        np.testing.assert_allclose(draws.mean(axis=0), mean, atol=0.05)
        np.testing.assert_allclose(draws.std(axis=0), 0.5, atol=0.05)

    def test_log_prob_standard_normal(self):
        pol = GaussianPolicy(1, 1, hidden=(4,), rng=np.random.default_rng(1))
        pol.log_std[:] = 0.0  # std = 1
        obs = np.zeros(1)
        mean = float(pol.mean_net.forward(obs)[0])
        lp = pol.log_prob(obs, [mean])
        assert lp == pytest.approx(-0.5 * math.log(2 * math.pi))
        lp1 = pol.log_prob(obs, [mean + 1.0])
        assert lp1 == pytest.approx(-0.5 - 0.5 * math.log(2 * math.pi))

    def test_sample_logprob_consistent(self):
        pol = GaussianPolicy(2, 2, hidden=(6,), rng=np.random.default_rng(2))
        rng = np.random.default_rng(3)
        obs = np.array([0.1, 0.9])
        action, lp = pol.sample(obs, rng)
        assert lp == pytest.approx(float(pol.log_prob(obs, action)))

    @pytest.mark.parametrize("seed", range(4))
    def test_log_prob_grads_finite_difference(self, seed):
        rng = np.random.default_rng(seed)
        pol = GaussianPolicy(3, 2, hidden=(5,), rng=rng)
        obs = rng.normal(size=(6, 3))
        actions = rng.normal(size=(6, 2))
        coeff = rng.normal(size=6)

        def loss(flat):
            probe = pol.clone()
            unflatten_params(flat, probe.params)
            return float((probe.log_prob(obs, actions) * coeff).sum())

        _, backward = pol.log_prob_grads(obs, actions)
        grads = backward(coeff)
        fd = oracles.finite_difference(loss, flatten_params(pol.params))
        np.testing.assert_allclose(flatten_params(grads), fd, atol=1e-6)

    def test_std_clamped(self):
        pol = GaussianPolicy(1, 1, hidden=(4,))
        pol.log_std[:] = 100.0
        assert pol.std()[0] == pytest.approx(10.0)
        pol.log_std[:] = -100.0
        assert pol.std()[0] == pytest.approx(1e-3)

    def test_clamped_log_std_gradient_zero(self):
        pol = GaussianPolicy(1, 1, hidden=(4,))
        pol.log_std[:] = -100.0
        _, backward = pol.log_prob_grads(np.zeros((2, 1)), np.zeros((2, 1)))
        grads = backward(np.ones(2))
        assert grads[-1][0] == 0.0


class TestCheckpoint:
    def test_roundtrip_bitwise(self, tmp_path):
        net = Mlp([4, 7, 2], np.random.default_rng(5))
        path = tmp_path / "ckpt.txt"
        save_params(path, net.params)
        loaded = load_params(path)
        assert len(loaded) == len(net.params)
        for a, b in zip(net.params, loaded):
            np.testing.assert_array_equal(a, b)  # exact via repr round-trip

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("something else\n")
        with pytest.raises(ShapeError):
            load_params(path)

    def test_flatten_roundtrip(self):
        net = Mlp([3, 5, 2], np.random.default_rng(8))
        flat = flatten_params(net.params)
        other = net.clone()
        for p in other.params:
            p[:] = 0.0
        unflatten_params(flat, other.params)
        for a, b in zip(net.params, other.params):
            np.testing.assert_array_equal(a, b)
