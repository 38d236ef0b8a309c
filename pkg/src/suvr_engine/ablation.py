"""
Grid runner for the neighbor-size and neighbor-resetting studies.

Every cell trains one model per seed and evaluates it with kNN. Cells can be
spread over a process pool; results are always reported in grid order.
"""

import itertools
import logging
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from suvr_engine.data_io import LabeledDataset
from suvr_engine.evaluation import evaluate
from suvr_engine.evaluation import neighbor_purity
from suvr_engine.models import AblationCellRecord
from suvr_engine.models import AblationGrid
from suvr_engine.models import EvalConfig
from suvr_engine.models import ResetPolicy
from suvr_engine.models import TrainConfig
from suvr_engine.neighbors import Strategy
from suvr_engine.neighbors import discover
from suvr_engine.trainer import fit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CellSpec:
    strategy: Strategy
    k: int
    negatives: int
    reset_policy: ResetPolicy


def grid_cells(base_cfg: TrainConfig, grid: AblationGrid) -> list[CellSpec]:
    """Expand the grid axes; cells whose negative count is not below k are skipped."""
    cells = []
    for strategy, k, reset_policy in itertools.product(
        grid.strategies, grid.ks, grid.reset_policies
    ):
        if grid.negatives is None:
            counts = [base_cfg.model_copy(update={"k": k, "negatives": None}).m]
        else:
            counts = grid.negatives
        for m in counts:
            if m >= k:
                logger.warning(f"Skipping cell {strategy}/k={k}: {m} negatives need k > {m}")
                continue
            cells.append(CellSpec(Strategy(strategy), k, m, ResetPolicy(reset_policy)))
    return cells


def _run_one(
    cell: CellSpec,
    seed: int,
    base_cfg: TrainConfig,
    train: LabeledDataset,
    test: LabeledDataset,
    eval_cfg: EvalConfig,
) -> tuple[float, float | None]:
    cfg = base_cfg.model_copy(
        update={
            "strategy": cell.strategy,
            "k": cell.k,
            "negatives": cell.negatives,
            "reset_policy": cell.reset_policy,
            "seed": seed,
        }
    )
    encoder, bank, _ = fit(train.features, cfg)
    accuracy = evaluate(encoder, bank.embeddings, train.labels, test.features, test.labels, eval_cfg)
    neighbor_sets = [
        discover(bank, query, cell.strategy, cell.k, cell.negatives) for query in range(bank.n)
    ]
    purity, _ = neighbor_purity(neighbor_sets, train.labels)
    return accuracy, purity


def _run_job(args) -> tuple[float, float | None]:
    return _run_one(*args)


def ablate(
    train: LabeledDataset,
    test: LabeledDataset,
    base_cfg: TrainConfig,
    grid: AblationGrid,
    eval_cfg: EvalConfig | None = None,
    on_cell: Callable[[AblationCellRecord], None] | None = None,
) -> list[AblationCellRecord]:
    """
    Train and evaluate every (cell, seed) pair; returns one record per cell.

    Raises:
        ValueError: If either split lacks labels.
    """
    if train.labels is None or test.labels is None:
        raise ValueError("ablation needs labeled train and test splits")
    eval_cfg = eval_cfg or EvalConfig()
    cells = grid_cells(base_cfg, grid)
    jobs = [
        (cell, seed, base_cfg, train, test, eval_cfg)
        for cell in cells
        for seed in grid.seeds
    ]
    logger.info(f"Running {len(cells)} cells x {len(grid.seeds)} seeds on {grid.workers} worker(s)")
    if grid.workers > 1:
        with ProcessPoolExecutor(max_workers=grid.workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(job) for job in jobs]

    records = []
    per_cell = len(grid.seeds)
    for position, cell in enumerate(cells):
        chunk = results[position * per_cell : (position + 1) * per_cell]
        accuracies = [accuracy for accuracy, _ in chunk]
        purities = [purity for _, purity in chunk if purity is not None]
        record = AblationCellRecord(
            strategy=cell.strategy,
            k=cell.k,
            negatives=cell.negatives,
            reset_policy=cell.reset_policy,
            seeds=list(grid.seeds),
            accuracies=accuracies,
            mean=float(np.mean(accuracies)),
            std=float(np.std(accuracies)),
            neighbor_purity=float(np.mean(purities)) if purities else None,
        )
        logger.info(
            f"Cell {cell.strategy} k={cell.k} m={cell.negatives} reset={cell.reset_policy}: "
            f"accuracy {record.mean:.4f} +- {record.std:.4f}"
        )
        records.append(record)
        if on_cell is not None:
            on_cell(record)
    return records
