import numpy as np
import pytest

from suvr_engine.checkpoint import Checkpoint
from suvr_engine.checkpoint import load_checkpoint
from suvr_engine.checkpoint import save_checkpoint
from suvr_engine.exceptions import CheckpointError
from suvr_engine.models import ExperimentConfig
from suvr_engine.trainer import SuvrTrainer


@pytest.fixture
def trained(small_blobs, tiny_config):
    trainer = SuvrTrainer(tiny_config, small_blobs.n, small_blobs.d_in)
    trainer.fit(small_blobs.features)
    config = ExperimentConfig(train=tiny_config)
    return Checkpoint(config, trainer.encoder, trainer.bank, trainer.optimizer)


def test_round_trip_is_exact(tmp_path, trained):
    path = save_checkpoint(trained, tmp_path / "ckpt" / "checkpoint.npz")
    loaded = load_checkpoint(path)
    assert loaded.config == trained.config
    assert np.array_equal(loaded.bank.embeddings, trained.bank.embeddings)
    assert loaded.bank.momentum == trained.bank.momentum
    for a, b in zip(loaded.encoder.parameters(), trained.encoder.parameters(), strict=True):
        assert np.array_equal(a, b)
    assert [layer.activation for layer in loaded.encoder.layers] == [
        layer.activation for layer in trained.encoder.layers
    ]
    for a, b in zip(loaded.optimizer.velocities, trained.optimizer.velocities, strict=True):
        assert np.array_equal(a, b)
    assert loaded.optimizer.epoch == trained.config.train.epochs


def test_missing_checkpoint(tmp_path):
    with pytest.raises(CheckpointError, match="not found"):
        load_checkpoint(tmp_path / "absent.npz")


def test_wrong_version(tmp_path):
    path = tmp_path / "old.npz"
    np.savez(path, format_version=np.array(99))
    with pytest.raises(CheckpointError, match="format 99"):
        load_checkpoint(path)


def test_missing_field(tmp_path):
    path = tmp_path / "partial.npz"
    np.savez(path, format_version=np.array(1))
    with pytest.raises(CheckpointError, match="missing checkpoint field"):
        load_checkpoint(path)


def test_not_an_archive(tmp_path):
    path = tmp_path / "junk.npz"
    path.write_bytes(b"definitely not a zip file")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
