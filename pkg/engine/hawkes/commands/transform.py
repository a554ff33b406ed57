"""
`transform`: joint transform of (Q, lambda) or (N, lambda) at one time, or the two-time pgf of Q
"""
import re
from typing import List, Optional

import numpy as np
import pandas as pd

from ..enums import Process
from ..exceptions import ConfigurationError, EXIT_OK
from ..logging_config import get_logger
from ..schemas import RunConfig
from ..transform import (
    TransformQuery,
    evaluate_joint_N_lambda,
    evaluate_joint_transform,
    evaluate_two_time_pgf,
    grid_for,
)
from . import finish, fixed_point_options, model_for, require

logger = get_logger("hawkes.cli.transform")

_POLAR = re.compile(r"^\s*([^@]+)@([^@]+)\s*$")


def parse_point(text: str) -> complex:
    """'0.5', '0.3+0.4j' or polar 'r@theta'"""
    match = _POLAR.match(text)
    try:
        if match:
            return complex(float(match.group(1)) * np.exp(1j * float(match.group(2))))
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigurationError(f"cannot read '{text}' as a complex number (use a+bj or r@theta)")


def parse_points(values: Optional[List[str]], d: int, default: complex) -> np.ndarray:
    if not values:
        return np.full(d, default, dtype=complex)
    points = np.array([parse_point(v) for v in values], dtype=complex)
    if points.shape[0] == 1:
        return np.full(d, points[0])
    if points.shape[0] != d:
        raise ConfigurationError(f"expected 1 or {d} values, got {points.shape[0]}")
    return points


def register(subparsers, parent):
    parser = subparsers.add_parser("transform", parents=[parent], help="Evaluate a joint transform")
    parser.add_argument("--t", type=float, required=True, help="Time t >= 0")
    parser.add_argument("--s", type=float, nargs="+", help="LST arguments for the intensities (default 0)")
    parser.add_argument("--z", nargs="+", help="pgf arguments, a+bj or r@theta (default 1)")
    parser.add_argument("--tau", type=float, help="Lag for the two-time pgf of Q")
    parser.add_argument("--y", nargs="+", help="pgf arguments at time t for the two-time pgf")
    parser.add_argument("--process", choices=["Q", "N"], default="Q", help="Count process paired with lambda")


def run(config: RunConfig) -> int:
    model = model_for(config)
    t = require(config.t, "t", "transform")
    options = fixed_point_options(config)
    z = parse_points(config.z, model.d, 1.0)

    if config.tau is not None:
        y = parse_points(config.y, model.d, 1.0)
        result = evaluate_two_time_pgf(model, t, config.tau, y, z, config.grid_steps, **options)
        label = "two_time_Q"
    else:
        s = np.zeros(model.d) if config.s is None else np.broadcast_to(np.asarray(config.s, dtype=float), (model.d,))
        if Process(config.process) is Process.N:
            result = evaluate_joint_N_lambda(model, t, s, z, config.grid_steps, **options)
            label = "joint_N_lambda"
        else:
            query = TransformQuery.build(model, t, s=s, z=z)
            result = evaluate_joint_transform(model, query, grid_for(t, config.grid_steps), **options)
            label = "joint_Q_lambda"

    value = result.value
    logger.info(f"{label}({t}) = {value.real:.12g}{value.imag:+.12g}j after {result.iterations} iterations "
                f"(residual {result.residual:.3e})")
    tau = config.tau if config.tau is not None else 0.0
    frame = pd.DataFrame([(t, tau, label, value.real, value.imag, result.iterations, result.residual)],
                         columns=["t", "tau", "transform", "re", "im", "iterations", "residual"])
    finish(config, frame)
    return EXIT_OK
