"""
SUVR train command
"""

import logging

from pydantic import ValidationError

from suvr_engine.checkpoint import Checkpoint
from suvr_engine.checkpoint import save_checkpoint
from suvr_engine.commands.common import checkpoint_path
from suvr_engine.commands.common import output_path
from suvr_engine.commands.common import resolve_config
from suvr_engine.commands.common import write_result
from suvr_engine.evaluation import evaluate
from suvr_engine.exceptions import SuvrError
from suvr_engine.metrics import MetricsWriter
from suvr_engine.models import ConfigRecord
from suvr_engine.models import SummaryRecord
from suvr_engine.suvr_config import load_dataset
from suvr_engine.trainer import SuvrTrainer

logger = logging.getLogger(__name__)


def register_train_command(subparsers, parents):
    """Register the train subcommand"""
    parser = subparsers.add_parser(
        "train",
        parents=parents,
        help="Train an encoder and memory bank, write metrics and a checkpoint",
        description="Fit SUVR on the configured dataset. Writes one metrics record per "
        "epoch plus a summary, evaluates on the held-out split when labels exist and "
        "saves a checkpoint.",
    )
    parser.add_argument("--checkpoint", help="Checkpoint path (default: output dir)")
    parser.set_defaults(handler=train_command)


def train_command(args) -> int:
    """
    Run one training job.

    Returns:
        int: 0 on success, 1 on configuration or domain errors.
    """
    try:
        config = resolve_config(args)
        train, test = load_dataset(config)
        trainer = SuvrTrainer(config.train, n=train.n, d_in=train.d_in)
        metrics_path = output_path(config, config.output.metrics_file)
        logger.info(f"Writing metrics to {metrics_path}")

        with MetricsWriter(metrics_path) as writer:
            writer.write(
                ConfigRecord(train=config.train, eval=config.eval, dataset=config.dataset)
            )
            history = trainer.fit(train.features, on_epoch=writer.write)
            accuracy = None
            if test is not None and train.labels is not None and test.labels is not None:
                accuracy = evaluate(
                    trainer.encoder,
                    trainer.bank.embeddings,
                    train.labels,
                    test.features,
                    test.labels,
                    config.eval,
                )
            writer.write(
                SummaryRecord(
                    epochs=len(history),
                    final_loss=history.final_loss,
                    accuracy=accuracy,
                    train_size=train.n,
                    test_size=0 if test is None else test.n,
                )
            )

        save_checkpoint(
            Checkpoint(config, trainer.encoder, trainer.bank, trainer.optimizer),
            checkpoint_path(config, args.checkpoint),
        )
        if accuracy is not None:
            write_result(f"accuracy {accuracy:.6f}")
        return 0

    except (SuvrError, ValidationError, OSError) as e:
        logger.error(f"Training failed: {e!s}")
        return 1
