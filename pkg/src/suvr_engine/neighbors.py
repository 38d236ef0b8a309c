"""
Neighbor discovery over the implicit similarity graph of the memory bank.

The graph is never materialized: an edge weight is the dot product of two
bank rows, so every traversal step is one similarity query against M.
"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from dataclasses import field
from enum import StrEnum
from typing import Any

import numpy as np

from suvr_engine.exceptions import NegativesExhaustPositivesError
from suvr_engine.exceptions import NeighborSetError
from suvr_engine.exceptions import NotEnoughCandidatesError
from suvr_engine.memory_bank import MemoryBank
from suvr_engine.memory_bank import top_k_excluding

logger = logging.getLogger(__name__)


class Strategy(StrEnum):
    BFS = "bfs"
    DFS = "dfs"
    GREEDY = "greedy"


class Branch(StrEnum):
    """Which traversal rule selected a positive."""

    BFS = "bfs"
    DFS = "dfs"


@dataclass(frozen=True)
class Positive:
    index: int
    similarity: float
    parent: int
    branch: Branch = Branch.BFS


@dataclass(frozen=True)
class Negative:
    index: int
    similarity: float
    uniform: bool = False


@dataclass(frozen=True)
class NeighborSet:
    """
    Positives and negatives discovered for one query instance.

    `positives` keep discovery order together with the similarity that
    selected them and their parent node. `negatives` hold the hard negatives
    (ascending similarity to the query) followed by any uniform draws.
    """

    query: int
    positives: tuple[Positive, ...]
    negatives: tuple[Negative, ...] = ()
    strategy: Strategy | None = None

    @property
    def positive_indices(self) -> list[int]:
        return [p.index for p in self.positives]

    @property
    def negative_indices(self) -> list[int]:
        return [c.index for c in self.negatives]

    def to_record(self) -> dict[str, Any]:
        return {
            "query": self.query,
            "strategy": str(self.strategy) if self.strategy else None,
            "positives": [
                {
                    "index": p.index,
                    "similarity": p.similarity,
                    "parent": p.parent,
                    "branch": str(p.branch),
                }
                for p in self.positives
            ],
            "negatives": [
                {"index": c.index, "similarity": c.similarity, "uniform": c.uniform}
                for c in self.negatives
            ],
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "NeighborSet":
        strategy = record.get("strategy")
        return cls(
            query=int(record["query"]),
            positives=tuple(
                Positive(
                    index=int(p["index"]),
                    similarity=float(p["similarity"]),
                    parent=int(p["parent"]),
                    branch=Branch(p.get("branch", "bfs")),
                )
                for p in record["positives"]
            ),
            negatives=tuple(
                Negative(
                    index=int(c["index"]),
                    similarity=float(c["similarity"]),
                    uniform=bool(c.get("uniform", False)),
                )
                for c in record["negatives"]
            ),
            strategy=Strategy(strategy) if strategy else None,
        )


def _check_k(bank: MemoryBank, query: int, k: int) -> None:
    bank.row(query)  # index check
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > bank.n - 1:
        raise NotEnoughCandidatesError(
            f"cannot discover {k} neighbors in a bank of {bank.n} instances"
        )


def bfs_positives(bank: MemoryBank, query: int, k: int) -> list[Positive]:
    """The k instances most similar to the query, all parented by the query."""
    _check_k(bank, query, k)
    scores = bank.similarities(bank.row(query))
    picks = top_k_excluding(scores, k, excluded=(query,))
    return [Positive(j, float(scores[j]), query, Branch.BFS) for j in picks]


def dfs_positives(bank: MemoryBank, query: int, k: int) -> list[Positive]:
    """
    A k-hop chain: each node is the unvisited instance most similar to the
    previous one, starting from the query.
    """
    _check_k(bank, query, k)
    visited = {query}
    frontier = query
    chain: list[Positive] = []
    for _ in range(k):
        scores = bank.similarities(bank.row(frontier))
        (pick,) = top_k_excluding(scores, 1, excluded=visited)
        chain.append(Positive(pick, float(scores[pick]), frontier, Branch.DFS))
        visited.add(pick)
        frontier = pick
    return chain


def greedy_positives(bank: MemoryBank, query: int, k: int) -> list[Positive]:
    """
    Per step, take the better of the BFS candidate (closest to the query) and
    the DFS candidate (closest to the current frontier).

    Ties go to the BFS candidate. The chosen instance becomes the new frontier
    whichever branch chose it.
    """
    _check_k(bank, query, k)
    query_scores = bank.similarities(bank.row(query))
    visited = {query}
    frontier = query
    picks: list[Positive] = []
    for _ in range(k):
        (b_pick,) = top_k_excluding(query_scores, 1, excluded=visited)
        b_sim = float(query_scores[b_pick])
        if frontier == query:
            d_pick, d_sim = b_pick, b_sim
        else:
            frontier_scores = bank.similarities(bank.row(frontier))
            (d_pick,) = top_k_excluding(frontier_scores, 1, excluded=visited)
            d_sim = float(frontier_scores[d_pick])
        if d_sim > b_sim:
            chosen = Positive(d_pick, d_sim, frontier, Branch.DFS)
        else:
            chosen = Positive(b_pick, b_sim, query, Branch.BFS)
        picks.append(chosen)
        visited.add(chosen.index)
        frontier = chosen.index
    return picks


SEARCHES = {
    Strategy.BFS: bfs_positives,
    Strategy.DFS: dfs_positives,
    Strategy.GREEDY: greedy_positives,
}


def sample_negatives(
    bank: MemoryBank, query: int, positives: list[Positive], m: int
) -> tuple[list[Positive], list[Negative]]:
    """
    Move the m positives least similar to the query into the negative set.

    Ties in similarity put the higher index first. Negatives come back in
    ascending similarity order; the remaining positives keep their order.

    Raises:
        NegativesExhaustPositivesError: If m >= len(positives).
    """
    if m < 0:
        raise ValueError(f"negative count must be >= 0, got {m}")
    if m >= len(positives):
        raise NegativesExhaustPositivesError(
            f"{m} negatives would consume all {len(positives)} positives"
        )
    if m == 0:
        return list(positives), []
    scores = bank.similarities(bank.row(query))
    ranked = sorted(positives, key=lambda p: (float(scores[p.index]), -p.index))
    carved = {p.index for p in ranked[:m]}
    negatives = [Negative(p.index, float(scores[p.index])) for p in ranked[:m]]
    kept = [p for p in positives if p.index not in carved]
    return kept, negatives


def draw_uniform_negatives(
    bank: MemoryBank,
    query: int,
    taken: Iterable[int],
    q: int,
    rng: np.random.Generator,
) -> list[Negative]:
    """Draw q extra negatives uniformly from instances not yet in the set."""
    if q <= 0:
        return []
    mask = np.ones(bank.n, dtype=bool)
    mask[query] = False
    mask[list(taken)] = False
    pool = np.flatnonzero(mask)
    if pool.size < q:
        raise NotEnoughCandidatesError(
            f"requested {q} uniform negatives but only {pool.size} instances remain"
        )
    drawn = rng.choice(pool, size=q, replace=False)
    scores = bank.similarities(bank.row(query))
    return [Negative(int(j), float(scores[j]), uniform=True) for j in drawn]


def discover(
    bank: MemoryBank,
    query: int,
    strategy: Strategy,
    k: int,
    m: int,
    extra_negatives: int = 0,
    rng: np.random.Generator | None = None,
) -> NeighborSet:
    """Run one traversal strategy, carve out hard negatives and optionally add uniform ones."""
    strategy = Strategy(strategy)
    found = SEARCHES[strategy](bank, query, k)
    positives, negatives = sample_negatives(bank, query, found, m)
    if extra_negatives:
        if rng is None:
            raise ValueError("uniform negatives need a random generator")
        negatives += draw_uniform_negatives(
            bank, query, [p.index for p in found], extra_negatives, rng
        )
    logger.debug(
        f"Query {query} ({strategy}): positives={[p.index for p in positives]} "
        f"negatives={[c.index for c in negatives]}"
    )
    return NeighborSet(query, tuple(positives), tuple(negatives), strategy)


@dataclass
class NeighborCache:
    """Neighbor sets kept between steps for the every-epoch and never reset policies."""

    entries: dict[int, tuple[int, NeighborSet]] = field(default_factory=dict)

    def get(self, query: int, epoch: int | None) -> NeighborSet | None:
        """Return a cached set; epoch None accepts an entry from any epoch."""
        entry = self.entries.get(query)
        if entry is None:
            return None
        cached_epoch, neighbor_set = entry
        if epoch is not None and cached_epoch != epoch:
            return None
        return neighbor_set

    def put(self, query: int, epoch: int, neighbor_set: NeighborSet) -> None:
        self.entries[query] = (epoch, neighbor_set)

    def __len__(self) -> int:
        return len(self.entries)


def validate_neighbor_set(
    neighbor_set: NeighborSet, n: int, k: int | None = None, extra_negatives: int = 0
) -> None:
    """
    Re-check every NeighborSet invariant.

    Raises:
        NeighborSetError: On the first violated invariant.
    """
    pos = neighbor_set.positive_indices
    neg = neighbor_set.negative_indices
    query = neighbor_set.query
    for index in [query, *pos, *neg]:
        if not 0 <= index < n:
            raise NeighborSetError(f"index {index} outside bank of size {n}")
    if query in pos or query in neg:
        raise NeighborSetError(f"query {query} appears among its own neighbors")
    if len(set(pos)) != len(pos):
        raise NeighborSetError(f"duplicate positives for query {query}: {pos}")
    if len(set(neg)) != len(neg):
        raise NeighborSetError(f"duplicate negatives for query {query}: {neg}")
    if set(pos) & set(neg):
        raise NeighborSetError(
            f"positives and negatives overlap for query {query}: {set(pos) & set(neg)}"
        )
    if k is not None and len(pos) + len(neg) != k + extra_negatives:
        raise NeighborSetError(
            f"query {query} has {len(pos)} positives and {len(neg)} negatives, "
            f"expected {k + extra_negatives} in total"
        )
