"""
SUVR eval command
"""

import logging

from pydantic import ValidationError

from suvr_engine.checkpoint import load_checkpoint
from suvr_engine.commands.common import apply_overrides
from suvr_engine.commands.common import checkpoint_path
from suvr_engine.commands.common import resolve_config
from suvr_engine.commands.common import write_result
from suvr_engine.evaluation import evaluate
from suvr_engine.exceptions import DimensionMismatchError
from suvr_engine.exceptions import SuvrError
from suvr_engine.suvr_config import load_dataset

logger = logging.getLogger(__name__)


def register_eval_command(subparsers, parents):
    """Register the eval subcommand"""
    parser = subparsers.add_parser(
        "eval",
        parents=parents,
        help="Report kNN accuracy of a trained checkpoint",
        description="Rebuild the dataset recorded in a checkpoint and score the "
        "held-out split by majority-vote kNN over the memory-bank rows.",
    )
    parser.add_argument("--checkpoint", help="Checkpoint path (default: output dir)")
    parser.set_defaults(handler=eval_command)


def eval_command(args) -> int:
    try:
        path = checkpoint_path(resolve_config(args), args.checkpoint)
        checkpoint = load_checkpoint(path)
        config = apply_overrides(checkpoint.config, args)
        train, test = load_dataset(config)
        if test is None or train.labels is None or test.labels is None:
            logger.error("Evaluation needs a labeled dataset with a held-out split")
            return 1
        if checkpoint.bank.n != train.n:
            raise DimensionMismatchError(
                f"checkpoint bank holds {checkpoint.bank.n} instances, dataset has {train.n}"
            )
        accuracy = evaluate(
            checkpoint.encoder,
            checkpoint.bank.embeddings,
            train.labels,
            test.features,
            test.labels,
            config.eval,
        )
        write_result(f"accuracy {accuracy:.6f}")
        return 0

    except (SuvrError, ValidationError, OSError) as e:
        logger.error(f"Evaluation failed: {e!s}")
        return 1
