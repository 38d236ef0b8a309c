"""
SUVR training loop.

Each step embeds a batch, discovers neighbors against the bank as it stood
at step start, accumulates the gradient of the three-term loss, applies one
Nesterov update with batch-mean gradients and finally EMA-updates the bank
row of every batch instance in batch order.

Under the every-epoch reset policy all neighbor sets are discovered against
the bank as it stands at epoch start and reused for the whole epoch; under
never they are discovered once, at the first epoch past warm-up.
"""

import logging
import time
from collections.abc import Callable
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from suvr_engine.encoder import MlpEncoder
from suvr_engine.encoder import backward
from suvr_engine.encoder import build_encoder
from suvr_engine.encoder import flatten_gradients
from suvr_engine.encoder import forward
from suvr_engine.exceptions import DatasetFormatError
from suvr_engine.exceptions import DimensionMismatchError
from suvr_engine.exceptions import NormTooSmallError
from suvr_engine.exceptions import TrainingError
from suvr_engine.memory_bank import MemoryBank
from suvr_engine.memory_bank import init_bank
from suvr_engine.models import EpochRecord
from suvr_engine.models import ResetPolicy
from suvr_engine.models import TrainConfig
from suvr_engine.neighbors import NeighborCache
from suvr_engine.neighbors import NeighborSet
from suvr_engine.neighbors import discover
from suvr_engine.numeric import as_matrix
from suvr_engine.numeric import make_rng
from suvr_engine.numeric import spawn_seeds
from suvr_engine.objective import LossBreakdown
from suvr_engine.objective import loss_gradient
from suvr_engine.objective import suvr_loss
from suvr_engine.optim import OptimizerState
from suvr_engine.optim import lr_at_epoch
from suvr_engine.optim import nesterov_step

logger = logging.getLogger(__name__)

EpochCallback = Callable[[EpochRecord], None]


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final_loss(self) -> float | None:
        return self.records[-1].loss if self.records else None


class SuvrTrainer:
    """
    Owns the encoder, memory bank, optimizer state and neighbor cache of one run.

    All randomness is spawned from `cfg.seed`: encoder init, bank init, batch
    shuffling and uniform negative draws each get their own child stream.
    """

    def __init__(self, cfg: TrainConfig, n: int, d_in: int):
        self.cfg = cfg
        encoder_seed, bank_seed, shuffle_seed, negative_seed = spawn_seeds(cfg.seed, 4)
        self.encoder: MlpEncoder = build_encoder(
            d_in, d=cfg.d, hidden=cfg.hidden_dims, seed=encoder_seed
        )
        self.bank: MemoryBank = init_bank(n, cfg.d, bank_seed, momentum=cfg.momentum)
        self.optimizer = OptimizerState.zeros_like(
            self.encoder.parameters(), mu=cfg.nesterov_mu, base_lr=cfg.base_lr
        )
        self.neighbor_cache = NeighborCache()
        self.history = TrainHistory()
        self._shuffle_rng = make_rng(shuffle_seed)
        self._negative_rng = make_rng(negative_seed)

    def neighbors_for(self, query: int, epoch: int) -> NeighborSet | None:
        """Neighbor set used for `query` in `epoch`, honoring warm-up and the reset policy."""
        cfg = self.cfg
        if epoch < cfg.warmup_epochs:
            return None
        if cfg.reset_policy == ResetPolicy.EVERY_STEP:
            return self._discover(query)
        cached = self.neighbor_cache.get(query, self._cache_epoch(epoch))
        if cached is None:
            cached = self._discover(query)
            self.neighbor_cache.put(query, epoch, cached)
        return cached

    def begin_epoch(self, epoch: int) -> int:
        """
        Discover the neighbor sets an epoch will reuse, against the bank as it stands now.

        every-epoch rediscovers every instance; never fills only the queries
        it has not seen yet. Returns the number of sets discovered.
        """
        cfg = self.cfg
        if epoch < cfg.warmup_epochs or cfg.reset_policy == ResetPolicy.EVERY_STEP:
            return 0
        cache_epoch = self._cache_epoch(epoch)
        stale = [
            q for q in range(self.bank.n) if self.neighbor_cache.get(q, cache_epoch) is None
        ]
        for query in stale:
            self.neighbor_cache.put(query, epoch, self._discover(query))
        if stale:
            logger.debug(f"Epoch {epoch + 1}: discovered {len(stale)} neighbor sets")
        return len(stale)

    def _cache_epoch(self, epoch: int) -> int | None:
        return epoch if self.cfg.reset_policy == ResetPolicy.EVERY_EPOCH else None

    def _discover(self, query: int) -> NeighborSet:
        cfg = self.cfg
        return discover(
            self.bank,
            query,
            cfg.strategy,
            cfg.k,
            cfg.m,
            extra_negatives=cfg.extra_negatives,
            rng=self._negative_rng,
        )

    def train_step(
        self, indices: Sequence[int], features, lr: float, epoch: int = 0
    ) -> LossBreakdown:
        """
        One optimization step over a batch; returns the batch-mean loss terms.

        Raises:
            TrainingError: If an embedding or bank update degenerates to zero norm.
        """
        features = as_matrix(features)
        if len(indices) != features.shape[0]:
            raise DimensionMismatchError(
                f"{len(indices)} indices for {features.shape[0]} feature rows"
            )
        params = self.encoder.parameters()
        grad_sums = [np.zeros_like(p) for p in params]
        breakdowns: list[LossBreakdown] = []
        embeddings = []
        for i, x in zip(indices, features, strict=True):
            i = int(i)
            try:
                v, cache = forward(self.encoder, x)
            except NormTooSmallError as e:
                raise TrainingError(f"forward pass failed for instance {i}: {e}", instance=i) from e
            neighbor_set = self.neighbors_for(i, epoch)
            positives = neighbor_set.positive_indices if neighbor_set else []
            negatives = neighbor_set.negative_indices if neighbor_set else []
            breakdowns.append(suvr_loss(self.bank, v, i, positives, negatives, self.cfg.tau))
            dl_dv = loss_gradient(self.bank, v, i, positives, negatives, self.cfg.tau)
            layer_grads = flatten_gradients(backward(self.encoder, cache, dl_dv))
            for acc, g in zip(grad_sums, layer_grads, strict=True):
                acc += g
            embeddings.append(v)

        # nothing is written until every bank row of the batch has been staged
        staged: dict[int, np.ndarray] = {}
        for i, v in zip(indices, embeddings, strict=True):
            i = int(i)
            try:
                staged[i] = self.bank.blend(i, v, staged.get(i))
            except NormTooSmallError as e:
                raise TrainingError(str(e), instance=i) from e

        batch = len(breakdowns)
        nesterov_step(params, [g / batch for g in grad_sums], self.optimizer, lr)
        self.bank.assign_rows(staged)
        return LossBreakdown.mean(breakdowns)

    def run_epoch(self, features: np.ndarray, epoch: int) -> EpochRecord:
        cfg = self.cfg
        n = features.shape[0]
        lr = lr_at_epoch(cfg.base_lr, epoch, cfg.lr_decay, cfg.lr_decay_every)
        self.optimizer.epoch = epoch
        self.begin_epoch(epoch)
        order = self._shuffle_rng.permutation(n)
        totals = np.zeros(3)
        start = time.perf_counter()
        for offset in range(0, n, cfg.batch_size):
            batch = order[offset : offset + cfg.batch_size]
            loss = self.train_step(batch, features[batch], lr, epoch)
            totals += len(batch) * np.array(
                [loss.instance_term, loss.positive_term, loss.negative_term]
            )
        instance, positive, negative = (float(t) for t in totals / n)
        record = EpochRecord(
            epoch=epoch + 1,
            lr=lr,
            loss=instance + positive + negative,
            instance_term=instance,
            positive_term=positive,
            negative_term=negative,
            wall_time=time.perf_counter() - start,
        )
        logger.info(
            f"Epoch {record.epoch}/{cfg.epochs}: lr={lr:.5g} loss={record.loss:.4f} "
            f"(instance={instance:.4f} positive={positive:.4f} negative={negative:.4f}) "
            f"in {record.wall_time:.2f}s"
        )
        return record

    def fit(self, features, on_epoch: EpochCallback | None = None) -> TrainHistory:
        features = as_matrix(features)
        if features.shape[0] != self.bank.n:
            raise DimensionMismatchError(
                f"trainer was built for {self.bank.n} instances, got {features.shape[0]}"
            )
        logger.info(
            f"Training on {features.shape[0]} instances: strategy={self.cfg.strategy} "
            f"k={self.cfg.k} m={self.cfg.m} reset={self.cfg.reset_policy} epochs={self.cfg.epochs}"
        )
        for epoch in range(self.cfg.epochs):
            record = self.run_epoch(features, epoch)
            self.history.records.append(record)
            if on_epoch is not None:
                on_epoch(record)
        self.optimizer.epoch = self.cfg.epochs
        return self.history


def fit(
    features, cfg: TrainConfig, on_epoch: EpochCallback | None = None
) -> tuple[MlpEncoder, MemoryBank, TrainHistory]:
    """
    Train an encoder and memory bank on a feature matrix.

    Only features are accepted; labels never reach the training path.
    """
    features = as_matrix(features)
    if not np.isfinite(features).all():
        raise DatasetFormatError("features contain NaN or infinite values")
    trainer = SuvrTrainer(cfg, n=features.shape[0], d_in=features.shape[1])
    history = trainer.fit(features, on_epoch=on_epoch)
    return trainer.encoder, trainer.bank, history
