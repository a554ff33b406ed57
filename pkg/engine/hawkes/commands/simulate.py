"""
`simulate`: one sample path on [0, horizon] as an event table
"""
from ..exceptions import EXIT_OK
from ..logging_config import get_logger
from ..schemas import RunConfig
from ..simulate import SAMPLERS
from . import finish, model_for, require, seed_for

logger = get_logger("hawkes.cli.simulate")


def register(subparsers, parent):
    parser = subparsers.add_parser("simulate", parents=[parent], help="Simulate one sample path")
    parser.add_argument("--horizon", type=float, required=True, help="Simulation horizon T > 0")
    parser.add_argument("--method", choices=["thinning", "cluster"], default="thinning", help="Path sampler")


def run(config: RunConfig) -> int:
    model = model_for(config)
    horizon = require(config.horizon, "horizon", "simulate")
    seed = seed_for(config)
    path = SAMPLERS[config.method](model, horizon, seed)
    logger.info(f"Simulated {path.n_events} events on [0, {horizon}] with {config.method.value}")
    finish(config, path.to_frame(), seeds={"seed": seed, "replication": 0},
           extra={"n_events": path.n_events})
    return EXIT_OK
