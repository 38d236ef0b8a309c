import logging
import os
import tomllib
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from suvr_engine.data_io import BlobSpec
from suvr_engine.data_io import LabeledDataset
from suvr_engine.data_io import align_labels
from suvr_engine.data_io import load_csv
from suvr_engine.data_io import load_idx
from suvr_engine.data_io import make_blobs
from suvr_engine.data_io import train_test_split
from suvr_engine.exceptions import ConfigError
from suvr_engine.models import ExperimentConfig
from suvr_engine.numeric import spawn_seeds

logger = logging.getLogger(__name__)

METRICS_DIR_ENV = "SUVR_METRICS_DIR"


def format_validation_error(error: ValidationError) -> str:
    """One "section.field: message" line per problem."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        lines.append(f"{location}: {item['msg']}")
    return "\n".join(lines)


def _merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a TOML experiment configuration into plain dictionaries."""
    path = Path(path)
    try:
        with path.open("rb") as f:
            return tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"configuration file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e


def get_env_overrides() -> dict[str, Any]:
    """Configuration overrides taken from environment variables."""
    overrides: dict[str, Any] = {}
    metrics_dir = os.getenv(METRICS_DIR_ENV)
    if metrics_dir:
        overrides["output"] = {"directory": metrics_dir}
    return overrides


def load_experiment_config(
    path: str | Path | None = None, overrides: dict[str, Any] | None = None
) -> ExperimentConfig:
    """
    Resolve defaults < config file < environment < explicit overrides.

    Raises:
        ConfigError: With one line per invalid field.
    """
    data: dict[str, Any] = read_config_file(path) if path else {}
    data = _merge(data, get_env_overrides())
    data = _merge(data, overrides or {})
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(format_validation_error(e)) from e


def load_dataset(
    config: ExperimentConfig,
) -> tuple[LabeledDataset, LabeledDataset | None]:
    """Build the (train, test) datasets described by `config.dataset`."""
    source = config.dataset
    blob_seed, split_seed = spawn_seeds(config.dataset_seed, 2)
    test: LabeledDataset | None = None
    if source.kind == "blobs":
        full = make_blobs(
            BlobSpec(
                num_classes=source.num_classes,
                per_class=source.per_class,
                d_in=source.d_in,
                center_radius=source.center_radius,
                noise_sigma=source.noise_sigma,
                seed=int(blob_seed.generate_state(1)[0]),
            )
        )
    elif source.kind == "csv":
        full = load_csv(source.path, source.has_header, source.label_column)
        if source.test_path:
            test = align_labels(
                load_csv(source.test_path, source.has_header, source.label_column), full
            )
    else:
        full = load_idx(source.path, source.labels_path)
        if source.test_path:
            test = load_idx(source.test_path, source.test_labels_path)

    if test is not None:
        if test.d_in != full.d_in:
            raise ConfigError(
                f"test features have dimension {test.d_in}, training features {full.d_in}"
            )
        return full, test
    if not full.has_labels:
        logger.warning("Dataset has no labels; kNN evaluation will be skipped")
        return full, None
    return train_test_split(full, source.test_size, split_seed)
