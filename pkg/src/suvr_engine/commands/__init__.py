"""SUVR command-line subcommands."""

from suvr_engine.commands.ablate import register_ablate_command
from suvr_engine.commands.evaluate import register_eval_command
from suvr_engine.commands.export import register_export_command
from suvr_engine.commands.trace import register_trace_command
from suvr_engine.commands.train import register_train_command


def register_commands(subparsers, parents):
    """Register all SUVR subcommands with the argument parser."""
    register_train_command(subparsers, parents)
    register_eval_command(subparsers, parents)
    register_ablate_command(subparsers, parents)
    register_export_command(subparsers, parents)
    register_trace_command(subparsers, parents)
