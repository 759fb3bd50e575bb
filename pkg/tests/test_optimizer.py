import numpy as np
import pytest

from epiforecast.neural.optimizer import adam_init, adam_step


def test_zero_gradients_leave_weights_unchanged():
    params = {"w": np.array([1.0, -2.0])}
    state = adam_init(params)
    adam_step(params, {"w": np.zeros(2)}, state, learning_rate=0.1)
    assert params["w"].tolist() == [1.0, -2.0]
    assert state.step_count == 1


def test_first_step_magnitude_with_unit_gradient():
    # bias-corrected moments are exactly 1, so the step is lr / (1 + eps)
    params = {"w": np.array([0.0])}
    state = adam_init(params)
    adam_step(params, {"w": np.array([1.0])}, state, learning_rate=0.1)
    assert params["w"][0] == pytest.approx(-0.1 / (1.0 + 1e-8), rel=1e-12)


def test_constant_positive_gradient_shrinks_weight_monotonically():
    params = {"w": np.array([5.0])}
    state = adam_init(params)
    previous = 5.0
    for _ in range(4):
        adam_step(params, {"w": np.array([1.0])}, state, learning_rate=0.1)
        assert params["w"][0] < previous
        previous = params["w"][0]


def test_second_step_matches_hand_iteration():
    params = {"w": np.array([0.0])}
    state = adam_init(params)
    adam_step(params, {"w": np.array([1.0])}, state, 0.1)
    adam_step(params, {"w": np.array([1.0])}, state, 0.1)
    # hand-iterated moments: m2 = 0.19, v2 = 0.001999, corrections 0.19 / 0.001999
    m_hat = (0.9 * 0.1 + 0.1 * 1.0) / (1 - 0.9**2)
    v_hat = (0.999 * 0.001 + 0.001 * 1.0) / (1 - 0.999**2)
    expected = -0.1 / (1.0 + 1e-8) - 0.1 * m_hat / (np.sqrt(v_hat) + 1e-8)
    assert params["w"][0] == pytest.approx(expected, rel=1e-9)


def test_shape_mismatch_rejected():
    params = {"w": np.zeros(2)}
    state = adam_init(params)
    with pytest.raises(ValueError):
        adam_step(params, {"w": np.zeros(3)}, state, 0.1)


def test_moments_mirror_weight_shapes():
    params = {"a": np.zeros((2, 3)), "b": np.zeros(4)}
    state = adam_init(params)
    assert state.first_moment["a"].shape == (2, 3)
    assert state.second_moment["b"].shape == (4,)
