"""
SUVR ablate command
"""

import logging

from pydantic import ValidationError

from suvr_engine.ablation import ablate
from suvr_engine.commands.common import output_path
from suvr_engine.commands.common import resolve_config
from suvr_engine.commands.common import write_result
from suvr_engine.exceptions import SuvrError
from suvr_engine.metrics import MetricsWriter
from suvr_engine.models import ConfigRecord
from suvr_engine.suvr_config import load_dataset
from suvr_engine.utils import format_table
from suvr_engine.utils import parse_csv_list
from suvr_engine.utils import parse_int_list

logger = logging.getLogger(__name__)


def register_ablate_command(subparsers, parents):
    """Register the ablate subcommand"""
    parser = subparsers.add_parser(
        "ablate",
        parents=parents,
        help="Run the neighbor-size / neighbor-resetting grid",
        description="Train and evaluate one model per grid cell and seed; report "
        "mean and standard deviation of kNN accuracy per cell.",
    )
    parser.add_argument("--strategies", help="Comma-separated strategies, e.g. bfs,dfs,greedy")
    parser.add_argument("--ks", help="Comma-separated neighbor sizes, e.g. 1,2,4,8")
    parser.add_argument("--reset-policies", help="Comma-separated reset policies")
    parser.add_argument("--negatives-grid", help="Comma-separated hard-negative counts")
    parser.add_argument("--seeds", help="Comma-separated run seeds")
    parser.add_argument("--workers", type=int, help="Parallel worker processes")
    parser.add_argument("--out", help="Ablation records file (default: output dir)")
    parser.set_defaults(handler=ablate_command)


def _grid_overrides(args) -> dict:
    grid = {}
    if args.strategies:
        grid["strategies"] = parse_csv_list(args.strategies)
    if args.ks:
        grid["ks"] = parse_int_list(args.ks)
    if args.reset_policies:
        grid["reset_policies"] = parse_csv_list(args.reset_policies)
    if args.negatives_grid:
        grid["negatives"] = parse_int_list(args.negatives_grid)
    if args.seeds:
        grid["seeds"] = parse_int_list(args.seeds)
    if args.workers is not None:
        grid["workers"] = args.workers
    return {"ablation": grid} if grid else {}


def ablate_command(args) -> int:
    try:
        config = resolve_config(args, extra=_grid_overrides(args))
        train, test = load_dataset(config)
        if test is None:
            logger.error("Ablation needs a labeled dataset with a held-out split")
            return 1
        path = output_path(config, config.output.ablation_file, args.out)
        with MetricsWriter(path) as writer:
            writer.write(
                ConfigRecord(train=config.train, eval=config.eval, dataset=config.dataset)
            )
            records = ablate(
                train, test, config.train, config.ablation, config.eval, on_cell=writer.write
            )
        rows = [
            [
                str(r.strategy),
                str(r.k),
                str(r.negatives),
                str(r.reset_policy),
                f"{r.mean:.4f}",
                f"{r.std:.4f}",
                "-" if r.neighbor_purity is None else f"{r.neighbor_purity:.3f}",
            ]
            for r in records
        ]
        write_result(
            format_table(
                ["strategy", "k", "m", "reset", "mean", "std", "purity"], rows
            )
        )
        return 0

    except (SuvrError, ValidationError, ValueError, OSError) as e:
        logger.error(f"Ablation failed: {e!s}")
        return 1
