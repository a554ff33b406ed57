"""
Command-line entry point: argument parsing, run configuration and exit codes
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .artifacts import load_run_config
from .commands import graph, moments, pmf, simulate, tails, transform, validate
from .config import get_settings
from .enums import MarkCoupling
from .error_handlers import handle_exception
from .exceptions import ConfigurationError
from .logging_config import get_logger, setup_logging
from .performance import timed
from .schemas import RunConfig

logger = get_logger("hawkes.cli")

COMMANDS = [validate, simulate, transform, pmf, moments, graph, tails]
COMMANDS_BY_NAME = {command.__name__.rsplit(".", 1)[-1]: command for command in COMMANDS}

_NOT_CONFIG = {"config"}


def build_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    common = parent.add_argument_group("common options")
    common.add_argument("--model", type=Path, help="Model file (JSON)")
    common.add_argument("--config", type=Path, help="Run configuration file (JSON); flags given here take precedence")
    common.add_argument("--out", type=Path, help="Output CSV; run-manifest.json is written beside it (default stdout)")
    common.add_argument("--seed", type=int, help="Base seed (default HAWKES_SEED)")
    common.add_argument("--grid-steps", dest="grid_steps", type=int, help="Grid steps on [0, t] (default 512)")
    common.add_argument("--tol", type=float, help="Fixed-point tolerance (default HAWKES_FIXED_POINT_TOL = 1e-10)")
    common.add_argument("--max-iter", dest="max_iter", type=int, help="Fixed-point iteration cap (default 200)")
    common.add_argument("--runs", type=int, help="Monte Carlo replications (default HAWKES_MC_RUNS)")
    common.add_argument("--threads", type=int, help="Worker processes, 0 = all physical cores (default HAWKES_THREADS)")
    common.add_argument("--mark-coupling", dest="mark_coupling", choices=[m.value for m in MarkCoupling],
                        help="Mark coupling of the fixed-point map (default shared)")

    parser = argparse.ArgumentParser(
        prog="hawkes",
        description="Transforms, moments, tails and simulation of multivariate Hawkes processes",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")
    for command in COMMANDS:
        command.register(subparsers, parent)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """RunConfig from parsed flags, layered over an optional --config file"""
    values = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG and v is not None}
    if args.config is not None:
        base = load_run_config(args.config).model_dump(exclude_none=True)
        values = {**base, **values}
    if "model" not in values:
        raise ConfigurationError("a model file is required (--model or 'model' in --config)")
    return RunConfig.model_validate(values)


def run(config: RunConfig) -> int:
    """Execute one configured run and return its exit status; engine errors propagate"""
    command = COMMANDS_BY_NAME.get(config.subcommand)
    if command is None:
        raise ConfigurationError(f"unknown subcommand '{config.subcommand}'")
    with timed(f"hawkes {config.subcommand}"):
        return command.run(config)


def main(argv: Optional[List[str]] = None) -> int:
    setup_logging(get_settings())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = config_from_args(args)
        logger.debug(f"Run configuration: {config.model_dump(mode='json', exclude_none=True)}")
        return run(config)
    except Exception as exc:
        report = handle_exception(exc)
        sys.stderr.write(report.to_json() + "\n")
        return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
