"""
Checkpoint archives bundling encoder, memory bank, optimizer state and config.

The archive is an uncompressed numpy .npz file read with allow_pickle=False;
every array round-trips bit for bit.
"""

import logging
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from suvr_engine.encoder import Activation
from suvr_engine.encoder import DenseLayer
from suvr_engine.encoder import MlpEncoder
from suvr_engine.exceptions import CheckpointError
from suvr_engine.exceptions import SuvrError
from suvr_engine.memory_bank import MemoryBank
from suvr_engine.models import ExperimentConfig
from suvr_engine.optim import OptimizerState

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    config: ExperimentConfig
    encoder: MlpEncoder
    bank: MemoryBank
    optimizer: OptimizerState


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays: dict[str, np.ndarray] = {
        "format_version": np.array(FORMAT_VERSION),
        "config_json": np.array(checkpoint.config.model_dump_json()),
        "bank_embeddings": checkpoint.bank.snapshot(),
        "bank_momentum": np.array(checkpoint.bank.momentum),
        "layer_count": np.array(len(checkpoint.encoder.layers)),
        "optimizer_mu": np.array(checkpoint.optimizer.mu),
        "optimizer_base_lr": np.array(checkpoint.optimizer.base_lr),
        "optimizer_epoch": np.array(checkpoint.optimizer.epoch),
    }
    for depth, layer in enumerate(checkpoint.encoder.layers):
        arrays[f"layer{depth}_weights"] = layer.weights
        arrays[f"layer{depth}_biases"] = layer.biases
        arrays[f"layer{depth}_activation"] = np.array(str(layer.activation))
    for slot, velocity in enumerate(checkpoint.optimizer.velocities):
        arrays[f"velocity{slot}"] = velocity
    with path.open("wb") as f:
        np.savez(f, **arrays)
    logger.info(f"Saved checkpoint to {path}")
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    """
    Raises:
        CheckpointError: If the file is missing, of another version or inconsistent.
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as archive:
            version = int(archive["format_version"])
            if version != FORMAT_VERSION:
                raise CheckpointError(
                    f"{path}: checkpoint format {version}, expected {FORMAT_VERSION}"
                )
            config = ExperimentConfig.model_validate_json(str(archive["config_json"]))
            layers = [
                DenseLayer(
                    weights=archive[f"layer{depth}_weights"].copy(),
                    biases=archive[f"layer{depth}_biases"].copy(),
                    activation=Activation(str(archive[f"layer{depth}_activation"])),
                )
                for depth in range(int(archive["layer_count"]))
            ]
            encoder = MlpEncoder(layers)
            bank = MemoryBank(
                archive["bank_embeddings"], momentum=float(archive["bank_momentum"])
            )
            velocities = [archive[f"velocity{slot}"].copy() for slot in range(2 * len(layers))]
            optimizer = OptimizerState(
                velocities=velocities,
                mu=float(archive["optimizer_mu"]),
                base_lr=float(archive["optimizer_base_lr"]),
                epoch=int(archive["optimizer_epoch"]),
            )
    except KeyError as e:
        raise CheckpointError(f"{path}: missing checkpoint field {e}") from e
    except (OSError, zipfile.BadZipFile) as e:
        raise CheckpointError(f"{path}: unreadable checkpoint: {e}") from e
    except (SuvrError, ValueError) as e:
        if isinstance(e, CheckpointError):
            raise
        raise CheckpointError(f"{path}: invalid checkpoint: {e}") from e
    for param, velocity in zip(encoder.parameters(), optimizer.velocities, strict=True):
        if param.shape != velocity.shape:
            raise CheckpointError(f"{path}: optimizer buffers do not match encoder shapes")
    logger.debug(f"Loaded checkpoint {path} (bank {bank.n} x {bank.d})")
    return Checkpoint(config, encoder, bank, optimizer)
