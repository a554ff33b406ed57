"""
Subcommands of the hawkes CLI; each module exposes register(subparsers, parent) and run(config)
"""
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd

from ..artifacts import load_model, write_csv, write_manifest
from ..config import get_settings
from ..exceptions import ConfigurationError
from ..logging_config import log_run_step
from ..schemas import HawkesModel, RunConfig


def model_for(config: RunConfig) -> HawkesModel:
    model = load_model(config.model)
    log_run_step(config.subcommand, f"model={config.model} d={model.d}")
    return model


def fixed_point_options(config: RunConfig) -> Dict[str, Any]:
    """Keyword options forwarded to the transform solvers"""
    options: Dict[str, Any] = {}
    if config.tol is not None:
        options["tol"] = config.tol
    if config.max_iter is not None:
        options["max_iter"] = config.max_iter
    if config.mark_coupling is not None:
        options["mark_coupling"] = config.mark_coupling
    return options


def seed_for(config: RunConfig) -> int:
    return get_settings().seed if config.seed is None else config.seed


def runs_for(config: RunConfig) -> int:
    return config.runs or get_settings().mc_runs


def require(value, name: str, subcommand: str):
    if value is None:
        raise ConfigurationError(f"{subcommand} needs --{name.replace('_', '-')}")
    return value


def finish(config: RunConfig, frame: pd.DataFrame, seeds: Optional[Dict[str, Any]] = None,
           extra: Optional[Dict[str, Any]] = None) -> Optional[Path]:
    """Write the result table and, for file output, the run manifest beside it"""
    path = write_csv(frame, config.out)
    if path is not None:
        manifest = write_manifest(path.parent, config, [path], seeds, extra)
        log_run_step(config.subcommand, f"artifact={path} manifest={manifest}")
    return path
