"""
`validate`: admissibility, branching matrix and stability of a model file
"""
import sys

import numpy as np
import pandas as pd

from ..exceptions import EXIT_CONFIG, EXIT_OK, ModelValidationError
from ..logging_config import get_logger
from ..model import branching_matrix, stationary_intensity, validate
from ..schemas import RunConfig
from . import finish, model_for

logger = get_logger("hawkes.cli.validate")


def register(subparsers, parent):
    subparsers.add_parser("validate", parents=[parent], help="Check a model file and report stability")


def run(config: RunConfig) -> int:
    model = model_for(config)
    report = validate(model)
    if not report.is_valid:
        raise ModelValidationError(report.violations)

    sys.stdout.write(report.summary() + "\n")
    rows = [("spectral_radius", report.spectral_radius)]
    entries = branching_matrix(model).entries
    rows += [(f"H_{i + 1}_{j + 1}", entries[i, j]) for i in range(model.d) for j in range(model.d)]
    if report.stable:
        rows += [(f"stationary_lambda_{i + 1}", value) for i, value in enumerate(stationary_intensity(model))]

    if config.out is not None:
        finish(config, pd.DataFrame(rows, columns=["quantity", "value"]))
    if not report.stable:
        logger.warning(f"Model '{model.name}' is unstable (spectral radius {report.spectral_radius:.6g})")
        return EXIT_CONFIG
    return EXIT_OK
