"""
`pmf`: distribution of Q_i(t) recovered from its pgf on the unit circle
"""
from ..exceptions import DomainError, EXIT_OK
from ..logging_config import get_logger
from ..schemas import RunConfig
from ..transform import pmf_Q
from . import finish, fixed_point_options, model_for, require

logger = get_logger("hawkes.cli.pmf")


def register(subparsers, parent):
    parser = subparsers.add_parser("pmf", parents=[parent], help="Probability mass function of Q_i(t)")
    parser.add_argument("--t", type=float, required=True, help="Time t >= 0")
    parser.add_argument("--component", type=int, default=1, help="Component i (1-based)")
    parser.add_argument("--max-k", dest="max_k", type=int, default=50, help="Largest k reported")


def run(config: RunConfig) -> int:
    model = model_for(config)
    t = require(config.t, "t", "pmf")
    component = config.component or 1
    if component > model.d:
        raise DomainError("pmf", f"component {component} outside 1..{model.d}")
    max_k = 50 if config.max_k is None else config.max_k

    result = pmf_Q(model, t, component - 1, max_k, config.grid_steps, workers=config.threads,
                   **fixed_point_options(config))
    logger.info(f"pmf of Q_{component}({t}): tail mass {result.tail_mass:.2e}, "
                f"renormalization error {result.renormalization_error:.2e}")
    finish(config, result.to_frame(), extra={
        "points": result.points,
        "tail_mass": result.tail_mass,
        "renormalization_error": result.renormalization_error,
        "aliasing_warning": result.aliasing_warning,
    })
    return EXIT_OK
