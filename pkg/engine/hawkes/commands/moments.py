"""
`moments`: moment tables on a time grid from the transforms, from Monte Carlo, or both side by side
"""
import argparse
from typing import List

import numpy as np
import pandas as pd

from ..enums import MomentSource
from ..exceptions import EXIT_OK
from ..logging_config import get_logger
from ..moments import moment_table, parse_statistic
from ..schemas import RunConfig
from ..simulate import mc_moments
from . import finish, fixed_point_options, model_for, runs_for, seed_for

logger = get_logger("hawkes.cli.moments")

DEFAULT_STATISTICS = ["mean_Q_1", "mean_lambda_1", "var_Q_1", "var_lambda_1", "cross_QL_1_1", "cross_QQ_1_2"]


def parse_time_grid(text: str) -> List[float]:
    """'0:10:21' (start:stop:count) or a comma-separated list"""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read time grid '{text}' (use start:stop:count or a list)")


def default_statistics(d: int) -> List[str]:
    return [code for code in DEFAULT_STATISTICS if d > 1 or not code.startswith("cross_QQ")]


def register(subparsers, parent):
    parser = subparsers.add_parser("moments", parents=[parent], help="Moment table on a time grid")
    parser.add_argument("--t-grid", dest="t_grid", type=parse_time_grid,
                        help="start:stop:count or t1,t2,... (default 0:10:21)")
    parser.add_argument("--statistics", nargs="+", help="Statistic codes, e.g. mean_Q_1 var_lambda_2 cross_QL_1_1")
    parser.add_argument("--source", choices=[s.value for s in MomentSource], default="transform")
    parser.add_argument("--tau", type=float, help="Lag for twotime_QQ statistics")
    parser.add_argument("--stencil", type=float, help="Finite-difference step")
    parser.add_argument("--method", choices=["thinning", "cluster"], default="cluster",
                        help="Monte Carlo path sampler")


def run(config: RunConfig) -> int:
    model = model_for(config)
    t_grid = config.t_grid if config.t_grid is not None else list(np.linspace(0.0, 10.0, 21))
    statistics = config.statistics or default_statistics(model.d)
    for code in statistics:
        parse_statistic(code)
    source = MomentSource(config.source)
    seeds = {}

    frames = {}
    if source in (MomentSource.TRANSFORM, MomentSource.BOTH):
        frames["transform"] = moment_table(model, t_grid, statistics, config.tau, config.stencil,
                                           config.grid_steps, config.threads,
                                           fixed_point_options(config).get("mark_coupling"))
    if source in (MomentSource.MC, MomentSource.BOTH):
        seed = seed_for(config)
        runs = runs_for(config)
        seeds = {"seed": seed, "runs": runs, "sampler": config.method.value}
        table = mc_moments(model, t_grid, runs, seed, config.method, config.threads)
        frames["mc"] = table[table["statistic"].isin(statistics)].reset_index(drop=True)

    if source is MomentSource.BOTH:
        frame = pd.merge(frames["transform"], frames["mc"], on=["t", "statistic"], how="left",
                         suffixes=("", "_mc"))
        frame = frame.rename(columns={"value_mc": "mc_value", "error_estimate_mc": "mc_error_estimate"})
    else:
        frame = next(iter(frames.values()))

    logger.info(f"Moments ({source.value}): {len(frame)} rows")
    finish(config, frame, seeds=seeds)
    return EXIT_OK
