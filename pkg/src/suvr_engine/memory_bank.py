"""
Memory bank of per-instance unit embeddings with EMA updates.
"""

import logging
from collections.abc import Iterable

import numpy as np

from suvr_engine.exceptions import DimensionMismatchError
from suvr_engine.exceptions import IndexOutOfRangeError
from suvr_engine.exceptions import NormTooSmallError
from suvr_engine.exceptions import NotEnoughCandidatesError
from suvr_engine.exceptions import NotUnitNormError
from suvr_engine.numeric import DenseMatrix
from suvr_engine.numeric import DenseVector
from suvr_engine.numeric import as_matrix
from suvr_engine.numeric import as_vector
from suvr_engine.numeric import l2_normalize
from suvr_engine.numeric import make_rng
from suvr_engine.numeric import normalize_rows
from suvr_engine.numeric import random_unit_rows

logger = logging.getLogger(__name__)

DEFAULT_MOMENTUM = 0.5
UNIT_TOLERANCE = 1e-9


class MemoryBank:
    """
    n x d matrix M of unit-norm instance embeddings.

    The row count is fixed at construction. The training loop is the only
    writer; similarity queries read the current rows.
    """

    def __init__(self, embeddings: DenseMatrix, momentum: float = DEFAULT_MOMENTUM):
        if not 0.0 <= momentum <= 1.0:
            raise ValueError(f"momentum must lie in [0, 1], got {momentum}")
        embeddings = as_matrix(embeddings)
        norms = np.linalg.norm(embeddings, axis=1)
        worst = float(np.max(np.abs(norms - 1.0)))
        if worst > UNIT_TOLERANCE:
            raise NotUnitNormError(
                f"memory bank rows must be unit-norm (max deviation {worst:.3e})"
            )
        self._embeddings = np.array(embeddings, dtype=np.float64, copy=True)
        self.momentum = float(momentum)

    @classmethod
    def from_rows(cls, rows, momentum: float = DEFAULT_MOMENTUM) -> "MemoryBank":
        """Build a bank from arbitrary non-zero rows, normalizing each one."""
        return cls(normalize_rows(rows), momentum=momentum)

    @property
    def embeddings(self) -> DenseMatrix:
        """Read-only view of M."""
        view = self._embeddings.view()
        view.flags.writeable = False
        return view

    @property
    def n(self) -> int:
        return self._embeddings.shape[0]

    @property
    def d(self) -> int:
        return self._embeddings.shape[1]

    def row(self, i: int) -> DenseVector:
        self._check_index(i)
        return self._embeddings[i].copy()

    def snapshot(self) -> DenseMatrix:
        return self._embeddings.copy()

    def similarities(self, v) -> DenseVector:
        """Return M v, the dot-product similarity of v to every instance."""
        v = as_vector(v)
        if v.size != self.d:
            raise DimensionMismatchError(
                f"query has dimension {v.size}, memory bank has {self.d}"
            )
        return self._embeddings @ v

    def ema_update(self, i: int, v) -> None:
        """
        Blend row i toward v: M_i <- normalize(m * M_i + (1 - m) * v).

        Only row i changes. A momentum of 1.0 leaves the row bit-for-bit intact.
        """
        self.assign_rows({i: self.blend(i, v)})

    def blend(self, i: int, v, current: DenseVector | None = None) -> DenseVector:
        """
        The row an EMA update of i toward v would write, without writing it.

        `current` stands in for M_i when several updates of the same row are staged.
        """
        self._check_index(i)
        v = as_vector(v)
        if v.size != self.d:
            raise DimensionMismatchError(
                f"update has dimension {v.size}, memory bank has {self.d}"
            )
        base = self._embeddings[i] if current is None else current
        if self.momentum == 1.0:
            return base.copy()
        try:
            return l2_normalize(self.momentum * base + (1.0 - self.momentum) * v)
        except NormTooSmallError as e:
            raise NormTooSmallError(f"EMA update of row {i} cancelled out: {e}") from e

    def assign_rows(self, rows: dict[int, DenseVector]) -> None:
        """Write staged rows produced by `blend`."""
        for i in rows:
            self._check_index(i)
        for i, row in rows.items():
            self._embeddings[i] = row

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexOutOfRangeError(f"instance {i} outside memory bank of size {self.n}")


def init_bank(
    n: int, d: int, seed: int | np.random.SeedSequence, momentum: float = DEFAULT_MOMENTUM
) -> MemoryBank:
    """Create a bank of n random unit rows; identical seeds give identical banks."""
    logger.debug(f"Initializing memory bank n={n} d={d} momentum={momentum}")
    return MemoryBank(random_unit_rows(n, d, make_rng(seed)), momentum=momentum)


def top_k_excluding(scores, k: int, excluded: Iterable[int] = ()) -> list[int]:
    """
    Indices of the k highest scores outside `excluded`.

    Sorted by descending score; equal scores are ordered by ascending index.

    Raises:
        NotEnoughCandidatesError: If fewer than k indices remain.
    """
    scores = as_vector(scores)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    mask = np.ones(scores.size, dtype=bool)
    excluded = [int(i) for i in excluded]
    if excluded:
        mask[excluded] = False
    available = int(mask.sum())
    if available < k:
        raise NotEnoughCandidatesError(
            f"requested {k} neighbors but only {available} candidates remain"
        )
    if k == 1:
        # argmax returns the first maximum, i.e. the smallest tied index
        masked = np.where(mask, scores, -np.inf)
        return [int(np.argmax(masked))]
    candidates = np.flatnonzero(mask)
    order = np.lexsort((candidates, -scores[candidates]))
    return [int(i) for i in candidates[order[:k]]]
