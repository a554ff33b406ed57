"""
`graph`: class table of the Hawkes graph with the tail index of every class
"""
import sys

from ..exceptions import EXIT_OK, UnsupportedConfigurationError
from ..logging_config import get_logger
from ..schemas import RunConfig
from ..tails import build_graph, class_table, classify, tail_indices
from . import finish, model_for

logger = get_logger("hawkes.cli.graph")


def register(subparsers, parent):
    subparsers.add_parser("graph", parents=[parent], help="Classes of the Hawkes graph")


def run(config: RunConfig) -> int:
    model = model_for(config)
    decomposition = classify(build_graph(model))
    try:
        report = tail_indices(model, enforce_scope=False)
        table = class_table(decomposition, report)
    except UnsupportedConfigurationError as exc:
        logger.warning(f"Tail indices unavailable: {exc.message}")
        table = class_table(decomposition)

    for row in table.itertuples(index=False):
        kind = "recurrent" if row.recurrent else "transient"
        logger.info(f"class {row.class_id}: {{{row.members}}} {kind}, gamma_bar={row.gamma_bar}")
    finish(config, table)
    if config.out is not None:
        sys.stdout.write(f"{len(table)} classes\n")
    return EXIT_OK
