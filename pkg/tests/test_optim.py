import numpy as np
import pytest

from suvr_engine.exceptions import DimensionMismatchError
from suvr_engine.numeric import make_rng
from suvr_engine.optim import OptimizerState
from suvr_engine.optim import lr_at_epoch
from suvr_engine.optim import nesterov_step


def test_fresh_state_example():
    w = np.zeros(1)
    state = OptimizerState.zeros_like([w], mu=0.9)
    nesterov_step([w], [np.ones(1)], state, lr=0.1)
    assert state.velocities[0][0] == 1.0
    assert w[0] == pytest.approx(-0.19, abs=1e-15)


def test_zero_momentum_is_plain_sgd():
    rng = make_rng(0)
    w = rng.standard_normal((3, 4))
    expected = w.copy()
    state = OptimizerState.zeros_like([w], mu=0.0)
    for _ in range(5):
        g = rng.standard_normal((3, 4))
        expected -= 0.05 * g
        nesterov_step([w], [g], state, lr=0.05)
        assert np.array_equal(w, expected)


def test_zero_gradient_is_a_fixed_point():
    w = np.array([1.5, -2.0])
    state = OptimizerState.zeros_like([w])
    nesterov_step([w], [np.zeros(2)], state, lr=0.03)
    assert np.array_equal(w, [1.5, -2.0])


def test_shape_mismatch():
    w = np.zeros(3)
    state = OptimizerState.zeros_like([w])
    with pytest.raises(DimensionMismatchError):
        nesterov_step([w], [np.zeros(2)], state, lr=0.1)
    with pytest.raises(DimensionMismatchError):
        nesterov_step([w, w], [np.zeros(3)], state, lr=0.1)


@pytest.mark.parametrize("mu", [-0.1, 1.0])
def test_momentum_range(mu):
    with pytest.raises(ValueError):
        OptimizerState([], mu=mu)


@pytest.mark.parametrize(
    "epoch,expected",
    [
        (0, 0.03),
        (39, 0.03),
        (40, 0.027),
        (79, 0.027),
        (80, 0.0243),
    ],
)
def test_lr_at_epoch(epoch, expected):
    assert lr_at_epoch(0.03, epoch) == pytest.approx(expected, rel=1e-12)


def test_lr_schedule_is_non_increasing_and_piecewise_constant():
    rates = [lr_at_epoch(0.03, epoch) for epoch in range(400)]
    assert all(a >= b for a, b in zip(rates, rates[1:], strict=False))
    assert len(set(rates)) == 10


def test_lr_rejects_non_positive_base():
    with pytest.raises(ValueError):
        lr_at_epoch(0.0, 3)
