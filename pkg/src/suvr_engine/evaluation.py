"""
Majority-vote kNN evaluation and neighbor-quality diagnostics.
"""

import logging
from collections import defaultdict
from collections.abc import Sequence

import numpy as np

from suvr_engine.encoder import MlpEncoder
from suvr_engine.encoder import embed_batch
from suvr_engine.exceptions import DimensionMismatchError
from suvr_engine.exceptions import NotEnoughCandidatesError
from suvr_engine.memory_bank import top_k_excluding
from suvr_engine.models import EvalConfig
from suvr_engine.neighbors import NeighborSet
from suvr_engine.numeric import as_vector

logger = logging.getLogger(__name__)


def knn_predict(train_embeddings, train_labels: Sequence[int], v, k_eval: int) -> int:
    """
    Majority label among the k_eval training embeddings most similar to v.

    Ties go to the label with the larger summed similarity, then the smaller id.
    """
    M = np.asarray(train_embeddings, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] == 0:
        raise NotEnoughCandidatesError("kNN needs a non-empty training set")
    v = as_vector(v)
    if v.size != M.shape[1]:
        raise DimensionMismatchError(
            f"query has dimension {v.size}, training embeddings have {M.shape[1]}"
        )
    if len(train_labels) != M.shape[0]:
        raise DimensionMismatchError(
            f"{len(train_labels)} labels for {M.shape[0]} training embeddings"
        )
    scores = M @ v
    votes: dict[int, int] = defaultdict(int)
    weight: dict[int, float] = defaultdict(float)
    for j in top_k_excluding(scores, k_eval):
        label = int(train_labels[j])
        votes[label] += 1
        weight[label] += float(scores[j])
    return min(votes, key=lambda label: (-votes[label], -weight[label], label))


def evaluate(
    enc: MlpEncoder,
    train_embeddings,
    train_labels: Sequence[int],
    test_features,
    test_labels: Sequence[int],
    eval_cfg: EvalConfig | None = None,
) -> float:
    """
    Fraction of test instances whose kNN vote matches their label.

    `train_embeddings` are normally the memory-bank rows of the training set.
    """
    eval_cfg = eval_cfg or EvalConfig()
    test_features = np.asarray(test_features, dtype=np.float64)
    if test_features.ndim != 2 or test_features.shape[0] == 0:
        raise NotEnoughCandidatesError("evaluation needs a non-empty test set")
    if len(test_labels) != test_features.shape[0]:
        raise DimensionMismatchError(
            f"{len(test_labels)} labels for {test_features.shape[0]} test instances"
        )
    embedded = embed_batch(enc, test_features)
    correct = sum(
        knn_predict(train_embeddings, train_labels, v, eval_cfg.k_eval) == int(label)
        for v, label in zip(embedded, test_labels, strict=True)
    )
    accuracy = correct / len(test_labels)
    logger.info(
        f"kNN accuracy {accuracy:.4f} ({correct}/{len(test_labels)}, k_eval={eval_cfg.k_eval})"
    )
    return accuracy


def similarity_profile(neighbor_sets: Sequence[NeighborSet]) -> list[float]:
    """Mean selection similarity of the positives at each discovery rank."""
    sums: dict[int, float] = defaultdict(float)
    counts: dict[int, int] = defaultdict(int)
    for neighbor_set in neighbor_sets:
        for rank, positive in enumerate(neighbor_set.positives):
            sums[rank] += positive.similarity
            counts[rank] += 1
    return [sums[rank] / counts[rank] for rank in sorted(counts)]


def neighbor_purity(
    neighbor_sets: Sequence[NeighborSet], labels: Sequence[int]
) -> tuple[float | None, list[float]]:
    """
    Share of positives whose label matches the query's, overall and per rank.

    Returns (None, []) when there are no positives at all.
    """
    hits: dict[int, int] = defaultdict(int)
    counts: dict[int, int] = defaultdict(int)
    for neighbor_set in neighbor_sets:
        query_label = labels[neighbor_set.query]
        for rank, positive in enumerate(neighbor_set.positives):
            hits[rank] += int(labels[positive.index] == query_label)
            counts[rank] += 1
    total = sum(counts.values())
    if total == 0:
        return None, []
    by_rank = [hits[rank] / counts[rank] for rank in sorted(counts)]
    return sum(hits.values()) / total, by_rank
