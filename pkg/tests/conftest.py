from pathlib import Path

import numpy as np
import pytest

from suvr_engine.data_io import BlobSpec
from suvr_engine.data_io import make_blobs
from suvr_engine.memory_bank import MemoryBank
from suvr_engine.models import TrainConfig

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def orthonormal_bank() -> MemoryBank:
    return MemoryBank(np.array([[1.0, 0.0], [0.0, 1.0]]))


@pytest.fixture
def chain_bank() -> MemoryBank:
    """Rows where BFS and DFS disagree at depth 2."""
    return MemoryBank.from_rows([[1.0, 0.0], [0.9, 0.436], [0.8, -0.6], [0.6, 0.8]])


@pytest.fixture
def small_blobs():
    return make_blobs(BlobSpec(num_classes=3, per_class=12, d_in=6, seed=3))


@pytest.fixture
def tiny_config() -> TrainConfig:
    return TrainConfig(
        k=2, negatives=1, epochs=2, batch_size=8, d=8, hidden_dims=[8], seed=7
    )


@pytest.fixture
def clean_env(monkeypatch):
    for name in ("SUVR_METRICS_DIR", "LOG_LEVEL", "SENTRY_DSN"):
        monkeypatch.delenv(name, raising=False)
