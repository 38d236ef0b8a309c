"""
Arguments and helpers shared by every subcommand.
"""

import argparse
import sys
from pathlib import Path
from typing import Any

from suvr_engine.models import ExperimentConfig
from suvr_engine.models import ResetPolicy
from suvr_engine.neighbors import Strategy
from suvr_engine.suvr_config import load_experiment_config

# flag dest -> (config section, field)
FLAG_FIELDS = {
    "seed": ("train", "seed"),
    "strategy": ("train", "strategy"),
    "k": ("train", "k"),
    "negatives": ("train", "negatives"),
    "tau": ("train", "tau"),
    "epochs": ("train", "epochs"),
    "batch_size": ("train", "batch_size"),
    "lr": ("train", "base_lr"),
    "reset_policy": ("train", "reset_policy"),
    "warmup_epochs": ("train", "warmup_epochs"),
    "dim": ("train", "d"),
    "k_eval": ("eval", "k_eval"),
    "output_dir": ("output", "directory"),
}


def common_parser() -> argparse.ArgumentParser:
    """Parent parser carrying the flags every subcommand accepts."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="TOML experiment configuration file")
    parser.add_argument("--seed", type=int, help="Seed governing every random draw")
    parser.add_argument("--output-dir", help="Directory for metrics, checkpoints and exports")
    parser.add_argument(
        "--log-level", help="Logging level (DEBUG, INFO, WARNING, ERROR); default from LOG_LEVEL"
    )
    group = parser.add_argument_group("training overrides")
    group.add_argument("--strategy", choices=[s.value for s in Strategy])
    group.add_argument("--k", type=int, help="Neighbors explored per query")
    group.add_argument("--negatives", type=int, help="Hard negatives carved from the neighbors")
    group.add_argument("--tau", type=float, help="Softmax temperature")
    group.add_argument("--epochs", type=int)
    group.add_argument("--batch-size", type=int)
    group.add_argument("--lr", type=float, help="Base learning rate")
    group.add_argument("--reset-policy", choices=[p.value for p in ResetPolicy])
    group.add_argument("--warmup-epochs", type=int)
    group.add_argument("--dim", type=int, help="Embedding dimension")
    group.add_argument("--k-eval", type=int, help="Neighbors voting in kNN evaluation")
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, dict[str, Any]] = {}
    for dest, (section, field) in FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides.setdefault(section, {})[field] = value
    return overrides


def resolve_config(
    args: argparse.Namespace, extra: dict[str, Any] | None = None
) -> ExperimentConfig:
    overrides = overrides_from_args(args)
    for section, values in (extra or {}).items():
        overrides.setdefault(section, {}).update(values)
    return load_experiment_config(args.config, overrides)


def apply_overrides(
    config: ExperimentConfig, args: argparse.Namespace
) -> ExperimentConfig:
    """
    Re-validate a stored config (e.g. from a checkpoint) with flag overrides on top.

    The dataset seed is pinned first, so `--seed` never swaps the data a
    checkpoint was trained on.
    """
    data = config.model_dump(mode="json")
    data["dataset"]["seed"] = config.dataset_seed
    for section, values in overrides_from_args(args).items():
        data[section].update(values)
    return ExperimentConfig.model_validate(data)


def output_path(config: ExperimentConfig, name: str, explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(config.output.directory) / name


def checkpoint_path(config: ExperimentConfig, explicit: str | None) -> Path:
    return output_path(config, config.output.checkpoint_file, explicit)


def write_result(text: str) -> None:
    """Human-readable command output goes to stdout; logs go to stderr."""
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    sys.stdout.flush()
