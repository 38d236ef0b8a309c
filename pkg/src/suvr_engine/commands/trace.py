"""
SUVR trace command
"""

import logging

import numpy as np
from pydantic import ValidationError

from suvr_engine.checkpoint import load_checkpoint
from suvr_engine.commands.common import apply_overrides
from suvr_engine.commands.common import checkpoint_path
from suvr_engine.commands.common import output_path
from suvr_engine.commands.common import resolve_config
from suvr_engine.commands.common import write_result
from suvr_engine.evaluation import neighbor_purity
from suvr_engine.evaluation import similarity_profile
from suvr_engine.exceptions import SuvrError
from suvr_engine.metrics import MetricsWriter
from suvr_engine.models import TraceSummaryRecord
from suvr_engine.neighbors import discover
from suvr_engine.neighbors import validate_neighbor_set
from suvr_engine.numeric import make_rng
from suvr_engine.suvr_config import load_dataset
from suvr_engine.utils import parse_int_list

logger = logging.getLogger(__name__)


def register_trace_command(subparsers, parents):
    """Register the trace subcommand"""
    parser = subparsers.add_parser(
        "trace",
        parents=parents,
        help="Emit neighbor-discovery traces for chosen queries",
        description="Run neighbor discovery on a checkpoint's memory bank and write "
        "one record per query (positives with parents and similarities, negatives) "
        "followed by a summary of similarity and label purity by discovery rank.",
    )
    parser.add_argument("--checkpoint", help="Checkpoint path (default: output dir)")
    parser.add_argument("--queries", help="Comma-separated query indices, e.g. 0,5,9")
    parser.add_argument(
        "--num-queries",
        type=int,
        default=10,
        help="Random queries to trace when --queries is not given (seeded)",
    )
    parser.add_argument("--out", help="Output file (default: output dir)")
    parser.set_defaults(handler=trace_command)


def trace_command(args) -> int:
    try:
        base = resolve_config(args)
        checkpoint = load_checkpoint(checkpoint_path(base, args.checkpoint))
        config = apply_overrides(checkpoint.config, args)
        bank = checkpoint.bank
        cfg = config.train

        if args.queries:
            queries = parse_int_list(args.queries)
        else:
            count = min(args.num_queries, bank.n)
            queries = sorted(int(q) for q in make_rng(cfg.seed).choice(bank.n, count, replace=False))

        rng = make_rng(cfg.seed)
        neighbor_sets = []
        for query in queries:
            neighbor_set = discover(
                bank, query, cfg.strategy, cfg.k, cfg.m, cfg.extra_negatives, rng
            )
            validate_neighbor_set(neighbor_set, bank.n, cfg.k, cfg.extra_negatives)
            neighbor_sets.append(neighbor_set)

        labels = None
        try:
            train, _ = load_dataset(config)
            if train.n == bank.n:
                labels = train.labels
        except (SuvrError, OSError) as e:
            logger.warning(f"Labels unavailable, purity not reported: {e!s}")

        purity, purity_by_rank = (None, None)
        if labels is not None:
            purity, purity_by_rank = neighbor_purity(neighbor_sets, np.asarray(labels))

        path = output_path(config, config.output.trace_file, args.out)
        with MetricsWriter(path) as writer:
            for neighbor_set in neighbor_sets:
                writer.write({"kind": "trace", **neighbor_set.to_record()})
            writer.write(
                TraceSummaryRecord(
                    strategy=cfg.strategy,
                    k=cfg.k,
                    negatives=cfg.m,
                    queries=len(neighbor_sets),
                    similarity_by_rank=similarity_profile(neighbor_sets),
                    purity=purity,
                    purity_by_rank=purity_by_rank,
                )
            )
        write_result(f"traced {len(neighbor_sets)} queries to {path}")
        return 0

    except (SuvrError, ValidationError, ValueError, OSError) as e:
        logger.error(f"Trace failed: {e!s}")
        return 1
