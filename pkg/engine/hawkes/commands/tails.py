"""
`tails`: power-law tail asymptotes of N, Q or lambda at time t against Monte Carlo exceedance frequencies
"""
import numpy as np
import pandas as pd

from ..enums import Process
from ..exceptions import DomainError, EXIT_OK
from ..logging_config import get_logger
from ..schemas import RunConfig
from ..simulate import mc_tail
from ..tails import tail_asymptote
from . import finish, model_for, require, runs_for, seed_for

logger = get_logger("hawkes.cli.tails")

DEFAULT_THRESHOLDS = np.geomspace(1.0, 1000.0, 13)


def register(subparsers, parent):
    parser = subparsers.add_parser("tails", parents=[parent], help="Tail asymptotes and Monte Carlo tails")
    parser.add_argument("--t", type=float, required=True, help="Time t > 0")
    parser.add_argument("--thresholds", type=float, nargs="+", help="Levels x (default 13 points from 1 to 1000)")
    parser.add_argument("--process", choices=[p.value for p in Process], default="N")
    parser.add_argument("--components", type=int, nargs="+", help="Components (1-based, default all)")
    parser.add_argument("--no-mc", dest="monte_carlo", action="store_false", help="Skip the Monte Carlo estimate")
    parser.add_argument("--method", choices=["thinning", "cluster"], default="cluster",
                        help="Monte Carlo path sampler")


def run(config: RunConfig) -> int:
    model = model_for(config)
    t = require(config.t, "t", "tails")
    process = Process(config.process)
    thresholds = np.asarray(config.thresholds if config.thresholds else DEFAULT_THRESHOLDS, dtype=float)
    components = config.components or list(range(1, model.d + 1))
    if any(not 1 <= c <= model.d for c in components):
        raise DomainError("tails", f"components must lie in 1..{model.d}")

    asymptotes = {c: tail_asymptote(model, t, c - 1, process, config.grid_steps) for c in components}
    rows = [(x, c, float(asymptotes[c](x))) for c in components for x in thresholds]
    frame = pd.DataFrame(rows, columns=["x", "component", "asymptote"])

    seeds = {}
    if config.monte_carlo:
        seed = seed_for(config)
        runs = runs_for(config)
        seeds = {"seed": seed, "runs": runs, "sampler": config.method.value}
        empirical = mc_tail(model, t, thresholds, runs, seed, [process], config.method, config.threads)
        empirical = empirical.rename(columns={"probability": "mc_estimate", "ci_lo": "mc_ci_lo", "ci_hi": "mc_ci_hi"})
        frame = frame.merge(empirical[["x", "component", "mc_estimate", "mc_ci_lo", "mc_ci_hi"]],
                            on=["x", "component"], how="left")
    else:
        frame = frame.assign(mc_estimate=np.nan, mc_ci_lo=np.nan, mc_ci_hi=np.nan)

    extra = {f"{process.value}_{c}": {"coefficient": a.coefficient, "gamma_bar": a.gamma_bar}
             for c, a in asymptotes.items()}
    logger.info(f"Tail asymptotes at t={t}: " + ", ".join(
        f"{name} ~ {v['coefficient']:.4g} x^-{v['gamma_bar']:.3g}" for name, v in extra.items()))
    finish(config, frame, seeds=seeds, extra=extra)
    return EXIT_OK
