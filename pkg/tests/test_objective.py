import math

import numpy as np
import pytest

from suvr_engine.exceptions import IndexOutOfRangeError
from suvr_engine.exceptions import NeighborSetError
from suvr_engine.exceptions import NonPositiveTemperatureError
from suvr_engine.memory_bank import MemoryBank
from suvr_engine.memory_bank import init_bank
from suvr_engine.numeric import l2_normalize
from suvr_engine.numeric import make_rng
from suvr_engine.objective import PROBABILITY_CLAMP
from suvr_engine.objective import LossBreakdown
from suvr_engine.objective import Temperature
from suvr_engine.objective import instance_probabilities
from suvr_engine.objective import loss_gradient
from suvr_engine.objective import suvr_loss


def identical_bank(n=5, d=3):
    row = l2_normalize(np.arange(1.0, d + 1.0))
    return MemoryBank(np.tile(row, (n, 1)))


def test_identical_rows_give_uniform_probabilities():
    bank = identical_bank()
    p = instance_probabilities(bank, bank.row(0), 0.07)
    assert np.allclose(p, 1 / 5, atol=1e-15)


def test_orthonormal_probability(orthonormal_bank):
    p = instance_probabilities(orthonormal_bank, [1.0, 0.0], 1.0)
    assert p[0] == pytest.approx(math.e / (math.e + 1), abs=1e-12)
    assert p.sum() == pytest.approx(1.0, abs=1e-15)


def test_pure_instance_loss(orthonormal_bank):
    loss = suvr_loss(orthonormal_bank, [1.0, 0.0], 0, [], [], 1.0)
    assert loss.total == pytest.approx(0.31326, abs=1e-5)
    assert loss.total == pytest.approx(-math.log(math.e / (math.e + 1)), abs=1e-12)
    assert loss.positive_term == 0.0 and loss.negative_term == 0.0


def test_loss_terms_add_up():
    bank = init_bank(20, 6, seed=1)
    v = bank.row(3)
    loss = suvr_loss(bank, v, 3, [4, 5], [6], 0.2)
    p = loss.probabilities
    assert loss.instance_term == pytest.approx(-math.log(p[3]))
    assert loss.positive_term == pytest.approx(-math.log(p[4]) - math.log(p[5]))
    assert loss.negative_term == pytest.approx(-math.log(1 - p[6]))
    assert loss.total == pytest.approx(
        loss.instance_term + loss.positive_term + loss.negative_term
    )


def test_identical_rows_give_zero_gradient():
    bank = identical_bank()
    grad = loss_gradient(bank, bank.row(0), 0, [], [], 0.07)
    assert np.allclose(grad, 0.0, atol=1e-12)


def finite_difference(bank, v, i, positives, negatives, tau, h=1e-6):
    grad = np.zeros_like(v)
    for j in range(v.size):
        step = np.zeros_like(v)
        step[j] = h
        up = suvr_loss(bank, v + step, i, positives, negatives, tau).total
        down = suvr_loss(bank, v - step, i, positives, negatives, tau).total
        grad[j] = (up - down) / (2 * h)
    return grad


def test_gradient_matches_finite_differences():
    rng = make_rng(17)
    for trial in range(100):
        n = int(rng.integers(4, 20))
        d = int(rng.integers(2, 8))
        bank = init_bank(n, d, seed=trial)
        i = int(rng.integers(n))
        others = [j for j in rng.permutation(n).tolist() if j != i]
        n_pos = int(rng.integers(0, min(4, len(others)) + 1))
        n_neg = int(rng.integers(0, min(3, len(others) - n_pos) + 1))
        positives = others[:n_pos]
        negatives = others[n_pos : n_pos + n_neg]
        tau = float(rng.uniform(0.1, 1.0))
        v = l2_normalize(rng.standard_normal(d))
        closed = loss_gradient(bank, v, i, positives, negatives, tau)
        numeric = finite_difference(bank, v, i, positives, negatives, tau)
        assert np.allclose(closed, numeric, rtol=1e-4, atol=1e-6), trial


def test_gradient_temperature_scaling(orthonormal_bank):
    # pure instance term on two orthonormal rows: dL/dv = -(1 - p0) (M0 - M1) / tau
    v = np.array([1.0, 0.0])
    for tau in (0.5, 1.0, 2.0):
        p0 = math.exp(1 / tau) / (math.exp(1 / tau) + 1)
        expected = -(1 - p0) * np.array([1.0, -1.0]) / tau
        assert np.allclose(loss_gradient(orthonormal_bank, v, 0, [], [], tau), expected)


def test_clamped_negative_stays_finite():
    bank = MemoryBank(np.eye(3))
    v = bank.row(1)
    loss = suvr_loss(bank, v, 0, [], [1], 0.001)
    assert loss.negative_term == pytest.approx(-math.log1p(-PROBABILITY_CLAMP))
    assert math.isfinite(loss.total)
    with_negative = loss_gradient(bank, v, 0, [], [1], 0.001)
    without = loss_gradient(bank, v, 0, [], [], 0.001)
    assert np.array_equal(with_negative, without)


@pytest.mark.parametrize(
    "i,positives,negatives,error",
    [
        (0, [0], [], NeighborSetError),
        (0, [], [0], NeighborSetError),
        (0, [1], [1], NeighborSetError),
        (5, [], [], IndexOutOfRangeError),
        (0, [2], [], IndexOutOfRangeError),
    ],
)
def test_invalid_sets(orthonormal_bank, i, positives, negatives, error):
    with pytest.raises(error):
        suvr_loss(orthonormal_bank, [1.0, 0.0], i, positives, negatives, 1.0)
    with pytest.raises(error):
        loss_gradient(orthonormal_bank, [1.0, 0.0], i, positives, negatives, 1.0)


@pytest.mark.parametrize("tau", [0.0, -1.0])
def test_non_positive_temperature(orthonormal_bank, tau):
    with pytest.raises(NonPositiveTemperatureError):
        Temperature(tau)
    with pytest.raises(NonPositiveTemperatureError):
        suvr_loss(orthonormal_bank, [1.0, 0.0], 0, [], [], tau)


def test_loss_breakdown_mean():
    mean = LossBreakdown.mean(
        [LossBreakdown(1.0, 2.0, 3.0, 6.0), LossBreakdown(3.0, 0.0, 1.0, 4.0)]
    )
    assert (mean.instance_term, mean.positive_term, mean.negative_term) == (2.0, 1.0, 2.0)
    assert mean.total == 5.0
    with pytest.raises(ValueError):
        LossBreakdown.mean([])


def test_probabilities_sum_to_one():
    rng = make_rng(23)
    for trial in range(50):
        bank = init_bank(int(rng.integers(2, 200)), 8, seed=trial)
        v = l2_normalize(rng.standard_normal(8))
        for tau in (0.07, 0.5, 1.0):
            assert instance_probabilities(bank, v, tau).sum() == pytest.approx(1.0, abs=1e-12)
