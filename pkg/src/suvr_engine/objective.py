"""
Non-parametric softmax over the memory bank and the three-term SUVR loss.

The loss for query instance i with embedding v is

    -log P(i|v) - sum_{j in pos} log P(j|v) - sum_{c in neg} log(1 - P(c|v))

where P(.|v) = softmax(M v / tau). Gradients flow into v only; bank rows are
constants that evolve through EMA.
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from suvr_engine.exceptions import IndexOutOfRangeError
from suvr_engine.exceptions import NeighborSetError
from suvr_engine.exceptions import NonPositiveTemperatureError
from suvr_engine.memory_bank import MemoryBank
from suvr_engine.numeric import DenseVector
from suvr_engine.numeric import log_softmax
from suvr_engine.numeric import stable_softmax

DEFAULT_TAU = 0.07
PROBABILITY_CLAMP = 1.0 - 1e-7


@dataclass(frozen=True)
class Temperature:
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if not self.tau > 0:
            raise NonPositiveTemperatureError(f"temperature must be > 0, got {self.tau}")


@dataclass(frozen=True)
class LossBreakdown:
    instance_term: float
    positive_term: float
    negative_term: float
    total: float
    # None for batch means, where a single distribution does not exist
    probabilities: DenseVector | None = None

    @classmethod
    def mean(cls, breakdowns: Sequence["LossBreakdown"]) -> "LossBreakdown":
        count = len(breakdowns)
        if count == 0:
            raise ValueError("cannot average an empty list of losses")
        instance = sum(b.instance_term for b in breakdowns) / count
        positive = sum(b.positive_term for b in breakdowns) / count
        negative = sum(b.negative_term for b in breakdowns) / count
        return cls(instance, positive, negative, instance + positive + negative)


def instance_probabilities(bank: MemoryBank, v, tau: float) -> DenseVector:
    """P(j|v) for every instance j of the bank."""
    return stable_softmax(bank.similarities(v), tau)


def _check_sets(
    n: int, i: int, positives: Sequence[int], negatives: Sequence[int]
) -> None:
    for index in [i, *positives, *negatives]:
        if not 0 <= index < n:
            raise IndexOutOfRangeError(f"instance {index} outside memory bank of size {n}")
    pos, neg = set(positives), set(negatives)
    if i in pos or i in neg:
        raise NeighborSetError(f"query {i} is listed among its own neighbors")
    if pos & neg:
        raise NeighborSetError(f"positives and negatives overlap: {sorted(pos & neg)}")


def suvr_loss(
    bank: MemoryBank,
    v,
    i: int,
    positives: Sequence[int],
    negatives: Sequence[int],
    tau: float,
) -> LossBreakdown:
    """
    Evaluate the three loss terms at v.

    v is expected to be unit-norm but is not required to be, so finite
    differences around a unit vector stay valid.
    """
    _check_sets(bank.n, i, positives, negatives)
    log_p = log_softmax(bank.similarities(v), tau)
    p = np.exp(log_p)
    instance = float(-log_p[i])
    positive = float(-sum(log_p[j] for j in positives))
    clamped = np.minimum(p[list(negatives)], PROBABILITY_CLAMP)
    negative = float(-np.log1p(-clamped).sum())
    return LossBreakdown(
        instance_term=instance,
        positive_term=positive,
        negative_term=negative,
        total=instance + positive + negative,
        probabilities=p,
    )


def loss_gradient(
    bank: MemoryBank,
    v,
    i: int,
    positives: Sequence[int],
    negatives: Sequence[int],
    tau: float,
) -> DenseVector:
    """
    dL/dv of `suvr_loss` in closed form.

    With p = softmax(M v / tau) and p_bar = sum_j p_j M_j, an attractive term
    -log p_a contributes -(M_a - p_bar) / tau and a repulsive term
    -log(1 - p_c) contributes p_c / (1 - p_c) * (M_c - p_bar) / tau. A clamped
    p_c is constant, so it contributes nothing.
    """
    _check_sets(bank.n, i, positives, negatives)
    M = bank.embeddings
    p = instance_probabilities(bank, v, tau)
    p_bar = p @ M
    attract = [i, *positives]
    grad = -(M[attract].sum(axis=0) - len(attract) * p_bar)
    for c in negatives:
        if p[c] < PROBABILITY_CLAMP:
            grad += (p[c] / (1.0 - p[c])) * (M[c] - p_bar)
    return grad / tau
