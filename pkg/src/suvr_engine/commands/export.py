"""
SUVR export command
"""

import logging

from pydantic import ValidationError

from suvr_engine.checkpoint import load_checkpoint
from suvr_engine.commands.common import checkpoint_path
from suvr_engine.commands.common import output_path
from suvr_engine.commands.common import resolve_config
from suvr_engine.commands.common import write_result
from suvr_engine.data_io import export_embeddings
from suvr_engine.encoder import embed_batch
from suvr_engine.exceptions import SuvrError
from suvr_engine.suvr_config import load_dataset

logger = logging.getLogger(__name__)


def register_export_command(subparsers, parents):
    """Register the export subcommand"""
    parser = subparsers.add_parser(
        "export",
        parents=parents,
        help="Dump learned embeddings for external visualization",
        description="Write memory-bank rows (or encoder outputs of the training "
        "features) with their labels in the plain-text embedding format.",
    )
    parser.add_argument("--checkpoint", help="Checkpoint path (default: output dir)")
    parser.add_argument(
        "--source",
        choices=["bank", "encoder"],
        default="bank",
        help="Export memory-bank rows or fresh encoder outputs",
    )
    parser.add_argument("--out", help="Output file (default: output dir)")
    parser.set_defaults(handler=export_command)


def export_command(args) -> int:
    try:
        config = resolve_config(args)
        checkpoint = load_checkpoint(checkpoint_path(config, args.checkpoint))
        train, _ = load_dataset(checkpoint.config)
        if args.source == "encoder":
            embeddings = embed_batch(checkpoint.encoder, train.features)
        else:
            embeddings = checkpoint.bank.snapshot()
        labels = train.labels if train.n == embeddings.shape[0] else None
        if labels is None and train.has_labels:
            logger.warning("Dataset size differs from the checkpoint; exporting without labels")
        path = output_path(config, config.output.export_file, args.out)
        export_embeddings(embeddings, path, labels)
        write_result(f"exported {embeddings.shape[0]} embeddings to {path}")
        return 0

    except (SuvrError, ValidationError, OSError) as e:
        logger.error(f"Export failed: {e!s}")
        return 1
