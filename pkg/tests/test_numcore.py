"""Tests for the feed-forward network, backpropagation and Adam."""

import numpy as np
import pytest

from src.core import (
    AdamState,
    Layer,
    NetworkParams,
    NumericError,
    ShapeError,
    adam_step,
    backward,
    forward,
    init_network,
)


def _random_net(rng, sizes):
    layers = [
        Layer(weight=rng.standard_normal((fan_out, fan_in)), bias=rng.standard_normal(fan_out))
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:])
    ]
    return NetworkParams(layers=tuple(layers))


def _scalar_params(value):
    return NetworkParams(layers=(Layer(weight=np.array([[value]]), bias=np.zeros(1)),))


class TestForward:

    def test_identity_layer(self):
        params = NetworkParams(layers=(Layer(weight=np.eye(2), bias=np.zeros(2)),))
        np.testing.assert_array_equal(forward(params, np.array([1.0, 2.0])), [1.0, 2.0])

    def test_zero_weights_return_bias(self):
        params = NetworkParams(layers=(Layer(weight=np.zeros((2, 3)), bias=np.array([3.0, -1.0])),))
        np.testing.assert_array_equal(forward(params, np.array([5.0, -2.0, 7.0])), [3.0, -1.0])

    def test_two_layers_match_straight_line_evaluation(self):
        w0 = np.array([[1.0, -2.0], [0.5, 1.0], [-1.0, 0.0]])
        b0 = np.array([0.1, -0.7, 0.2])
        w1 = np.array([[1.0, 2.0, -1.0], [0.0, -1.0, 3.0]])
        b1 = np.array([0.5, 0.0])
        params = NetworkParams(layers=(Layer(w0, b0), Layer(w1, b1)))

        # x = (1, 0): hidden pre-activations (1.1, -0.2, -0.8) -> ReLU (1.1, 0, 0)
        hidden = np.array([1.1, 0.0, 0.0])
        expected = np.array([
            1.0 * hidden[0] + 2.0 * hidden[1] - 1.0 * hidden[2] + 0.5,
            0.0 * hidden[0] - 1.0 * hidden[1] + 3.0 * hidden[2] + 0.0,
        ])
        np.testing.assert_allclose(forward(params, np.array([1.0, 0.0])), expected, rtol=1e-12)

    def test_batch_and_vector_agree(self):
        rng = np.random.default_rng(0)
        params = _random_net(rng, [3, 5, 4])
        x = rng.standard_normal((6, 3))
        batch = forward(params, x)
        assert batch.shape == (6, 4)
        for row in range(6):
            np.testing.assert_allclose(forward(params, x[row]), batch[row], rtol=1e-14)

    def test_repeated_calls_are_bit_identical(self):
        rng = np.random.default_rng(1)
        params = _random_net(rng, [4, 8, 3])
        x = rng.standard_normal((10, 4))
        np.testing.assert_array_equal(forward(params, x), forward(params, x))

    def test_dimension_mismatch(self):
        params = init_network(3, 2, hidden=(4,))
        with pytest.raises(ShapeError):
            forward(params, np.zeros(5))

    def test_layers_must_chain(self):
        with pytest.raises(ShapeError):
            NetworkParams(layers=(Layer(np.zeros((4, 3)), np.zeros(4)), Layer(np.zeros((2, 5)), np.zeros(2))))


class TestInitNetwork:

    def test_default_architecture(self):
        params = init_network(7, 5)
        assert [layer.weight.shape for layer in params.layers] == [(128, 7), (64, 128), (5, 64)]
        assert all(np.all(layer.bias == 0.0) for layer in params.layers)

    def test_glorot_bounds(self):
        params = init_network(10, 3, hidden=(20,), rng=np.random.default_rng(3))
        for layer in params.layers:
            bound = np.sqrt(6.0 / (layer.fan_in + layer.fan_out))
            assert np.all(np.abs(layer.weight) <= bound)

    def test_seeded_init_is_deterministic(self):
        a = init_network(4, 3, hidden=(6,), rng=np.random.default_rng(11))
        b = init_network(4, 3, hidden=(6,), rng=np.random.default_rng(11))
        np.testing.assert_array_equal(a.to_flat(), b.to_flat())


class TestBackward:

    def test_zero_upstream_gives_zero_gradient(self):
        rng = np.random.default_rng(2)
        params = _random_net(rng, [3, 4, 2])
        grads = backward(params, rng.standard_normal(3), np.zeros(2))
        assert np.all(grads.to_flat() == 0.0)

    def test_linear_layer_weight_gradient_is_input(self):
        params = NetworkParams(layers=(Layer(np.ones((2, 3)), np.zeros(2)),))
        x = np.array([0.5, -1.0, 2.0])
        grads = backward(params, x, np.array([1.0, 0.0]))
        np.testing.assert_array_equal(grads.layers[0].weight[0], x)
        np.testing.assert_array_equal(grads.layers[0].weight[1], 0.0)
        np.testing.assert_array_equal(grads.layers[0].bias, [1.0, 0.0])

    def test_matches_central_finite_differences(self):
        rng = np.random.default_rng(5)
        params = _random_net(rng, [3, 6, 5, 4])
        x = rng.standard_normal((4, 3))
        cotangent = rng.standard_normal((4, 4))

        def scalar(flat):
            return float(np.sum(forward(params.from_flat(flat), x) * cotangent))

        flat = params.to_flat()
        h = 1e-6
        numeric = np.empty_like(flat)
        for idx in range(flat.shape[0]):
            step = np.zeros_like(flat)
            step[idx] = h
            numeric[idx] = (scalar(flat + step) - scalar(flat - step)) / (2 * h)

        analytic = backward(params, x, cotangent).to_flat()
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-7)

    def test_upstream_shape_checked(self):
        params = init_network(3, 2, hidden=(4,))
        with pytest.raises(ShapeError):
            backward(params, np.zeros((5, 3)), np.zeros((5, 3)))


class TestAdam:

    def test_zero_gradient_leaves_params_unchanged(self):
        rng = np.random.default_rng(8)
        params = _random_net(rng, [3, 4, 2])
        state = AdamState.for_params(params)
        for _ in range(3):
            new_params, state = adam_step(params, params.zeros_like(), state)
            np.testing.assert_array_equal(new_params.to_flat(), params.to_flat())
        assert state.step == 3

    def test_zero_gradient_after_real_steps(self):
        params = _scalar_params(1.0)
        state = AdamState.for_params(params)
        params, state = adam_step(params, _scalar_params(0.4), state)
        before = params.to_flat().copy()
        params, state = adam_step(params, params.zeros_like(), state)
        np.testing.assert_array_equal(params.to_flat(), before)

    def test_first_step_moves_by_step_size(self):
        params = _scalar_params(1.0)
        state = AdamState.for_params(params, lr=1e-3)
        new_params, new_state = adam_step(params, _scalar_params(0.3), state)
        # weight moves by lr, the bias gradient is zero
        np.testing.assert_allclose(params.to_flat() - new_params.to_flat(), [1e-3, 0.0], rtol=1e-6, atol=0.0)
        assert new_state.step == 1

    def test_quadratic_decreases_monotonically(self):
        theta = _scalar_params(1.0)
        state = AdamState.for_params(theta, lr=0.1)
        values = [theta.to_flat()[0]]
        for _ in range(2):
            # gradient of 1/2 theta^2 is theta
            theta, state = adam_step(theta, theta, state)
            values.append(theta.to_flat()[0])
        assert values[0] > values[1] > values[2] > 0.0

    def test_inputs_not_modified(self):
        params = _scalar_params(1.0)
        state = AdamState.for_params(params)
        adam_step(params, _scalar_params(0.5), state)
        assert params.to_flat()[0] == 1.0
        assert state.step == 0
        assert state.first_moment[0][0, 0] == 0.0

    def test_non_finite_gradient_names_index(self):
        rng = np.random.default_rng(9)
        params = _random_net(rng, [2, 3, 2])
        bad = params.zeros_like()
        bad.layers[1].weight[1, 2] = np.nan
        with pytest.raises(NumericError) as excinfo:
            adam_step(params, bad, AdamState.for_params(params))
        assert excinfo.value.index == ("layers[1].weight", (1, 2))
