"""
Moments of (Q, lambda) by numerical differentiation of the transforms
"""
import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import get_settings
from .enums import MarkCoupling, MomentKind, Process
from .exceptions import DomainError, NumericalError
from .model import require_stable
from .performance import parallel_map, timed
from .quadrature import Grid
from .schemas import HawkesModel
from .tails import solve_renewal
from .transform import joint_transform, TransformQuery, two_time_pgf

logger = logging.getLogger(__name__)

_PAIR_KINDS = {MomentKind.CROSS_QQ, MomentKind.CROSS_QL, MomentKind.TWO_TIME_QQ}
_STATISTIC = re.compile(r"^(mean_Q|mean_lambda|var_Q|var_lambda|cross_QQ|cross_QL|twotime_QQ)_(\d+)(?:_(\d+))?$")


class MomentRequest(BaseModel):
    """One statistic at one time; component indices are 0-based"""
    model_config = ConfigDict(frozen=True)

    kind: MomentKind
    i: int = Field(ge=0)
    j: Optional[int] = Field(None, ge=0)
    t: float = Field(ge=0)
    tau: Optional[float] = None
    stencil: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def check_kind(self):
        if self.kind in _PAIR_KINDS and self.j is None:
            raise ValueError(f"{self.kind.value} needs a second component")
        if self.kind not in _PAIR_KINDS and self.j is not None:
            raise ValueError(f"{self.kind.value} takes a single component")
        if self.kind is MomentKind.TWO_TIME_QQ and not (self.tau is not None and self.tau > 0):
            raise ValueError("two-time moments need tau > 0")
        return self

    @property
    def statistic(self) -> str:
        code = f"{self.kind.value}_{self.i + 1}"
        return code if self.j is None else f"{code}_{self.j + 1}"

    @classmethod
    def from_statistic(cls, code: str, t: float, tau: Optional[float] = None,
                       stencil: Optional[float] = None) -> "MomentRequest":
        kind, i, j = parse_statistic(code)
        return cls(kind=kind, i=i, j=j, t=t, tau=tau if kind is MomentKind.TWO_TIME_QQ else None, stencil=stencil)


def parse_statistic(code: str) -> Tuple[MomentKind, int, Optional[int]]:
    """'cross_QL_1_2' -> (CROSS_QL, 0, 1)"""
    match = _STATISTIC.match(code.strip())
    if not match:
        raise DomainError("parse_statistic", f"unknown statistic '{code}'")
    kind = MomentKind(match.group(1))
    i = int(match.group(2)) - 1
    j = int(match.group(3)) - 1 if match.group(3) else None
    if i < 0 or (j is not None and j < 0):
        raise DomainError("parse_statistic", f"components are 1-based in '{code}'")
    return kind, i, j


@dataclass(frozen=True)
class MomentEstimate:
    request: MomentRequest
    value: float
    error_estimate: float
    clipped: bool = False


# ============================================================================
# STENCILS
# ============================================================================

def _transform_point(task) -> complex:
    """Evaluate one stencil node: ('joint', t, s, z) or ('two_time', t, tau, y, z)"""
    model, point, grid_steps, options = task
    if point[0] == "two_time":
        _, t, tau, y, z = point
        return two_time_pgf(model, t, tau, np.asarray(y), np.asarray(z), grid_steps, **options)
    _, t, s, z = point
    query = TransformQuery.build(model, t, s=np.asarray(s), z=np.asarray(z))
    grid = Grid(t, grid_steps or get_settings().grid_steps)
    return joint_transform(model, query, grid, **options)


@dataclass
class _Plan:
    request: MomentRequest
    points: List[tuple]
    combine: Callable[[Dict[tuple, complex]], Tuple[float, float, bool]]


def richardson(coarse: float, fine: float) -> Tuple[float, float]:
    """One extrapolation level for an O(h^2) scheme; error is the change over the fine estimate"""
    extrapolated = (4.0 * fine - coarse) / 3.0
    return extrapolated, abs(extrapolated - fine)


def _unit(d: int, index: int, value) -> tuple:
    vector = [0.0] * d if isinstance(value, float) else [1.0 + 0.0j] * d
    vector[index] = value
    return tuple(vector)


def _angle_point(model: HawkesModel, t: float, angles: Dict[int, float]) -> tuple:
    z = [1.0 + 0.0j] * model.d
    for index, theta in angles.items():
        z[index] = z[index] * complex(np.exp(1j * theta))
    return ("joint", t, (0.0,) * model.d, tuple(z))


def _lambda_point(model: HawkesModel, t: float, i: int, s: float, angles: Optional[Dict[int, float]] = None) -> tuple:
    _, _, _, z = _angle_point(model, t, angles or {})
    return ("joint", t, _unit(model.d, i, float(s)), z)


def _two_time_point(model: HawkesModel, t: float, tau: float, i: int, j: int, theta_i: float, theta_j: float) -> tuple:
    y = [1.0 + 0.0j] * model.d
    z = [1.0 + 0.0j] * model.d
    y[i] = complex(np.exp(1j * theta_i))
    z[j] = complex(np.exp(1j * theta_j))
    return ("two_time", t, tau, tuple(y), tuple(z))


def _clip_variance(value: float, error: float) -> Tuple[float, float, bool]:
    if value >= 0:
        return value, error, False
    if value > -get_settings().variance_clip:
        logger.warning(f"Clipped slightly negative variance {value:.3e} to 0")
        return 0.0, error, True
    raise NumericalError(f"Variance estimate {value:.3e} is negative beyond the clipping threshold")


def _plan(model: HawkesModel, request: MomentRequest) -> _Plan:
    """
    Stencil nodes and their combination for one request

    Q-moments differentiate along the unit circle z = exp(i theta), which never
    leaves the closed disc: E[Q] ~ Im f / theta, E[Q^2] ~ 2 (1 - Re f) / theta^2
    and E[Q_i Q_j] ~ -(Re f(theta, theta) - Re f(theta, -theta)) / (2 theta^2).
    lambda-moments use forward stencils in s >= 0. Each scheme is evaluated at h
    and h/2 and combined by one Richardson step.
    """
    t, i, j = request.t, request.i, request.j
    h = request.stencil or get_settings().stencil_step
    steps = (h, h / 2)
    kind = request.kind

    if kind in (MomentKind.MEAN_Q, MomentKind.VAR_Q):
        nodes = {step: _angle_point(model, t, {i: step}) for step in steps}

        def combine(values):
            first = [np.imag(values[nodes[step]]) / step for step in steps]
            mean, mean_error = richardson(*first)
            if kind is MomentKind.MEAN_Q:
                return mean, mean_error, False
            second = [2.0 * (1.0 - np.real(values[nodes[step]])) / step ** 2 for step in steps]
            raw, raw_error = richardson(*second)
            return _clip_variance(raw - mean ** 2, raw_error + 2 * abs(mean) * mean_error)

        return _Plan(request, list(nodes.values()), combine)

    if kind in (MomentKind.MEAN_LAMBDA, MomentKind.VAR_LAMBDA):
        multiples = (0, 1, 2, 3) if kind is MomentKind.VAR_LAMBDA else (0, 1, 2)
        nodes = {(step, k): _lambda_point(model, t, i, k * step) for step in steps for k in multiples}

        def combine(values):
            L = {key: np.real(values[node]) for key, node in nodes.items()}
            first = [-(-3 * L[(step, 0)] + 4 * L[(step, 1)] - L[(step, 2)]) / (2 * step) for step in steps]
            mean, mean_error = richardson(*first)
            if kind is MomentKind.MEAN_LAMBDA:
                return mean, mean_error, False
            second = [(2 * L[(step, 0)] - 5 * L[(step, 1)] + 4 * L[(step, 2)] - L[(step, 3)]) / step ** 2
                      for step in steps]
            raw, raw_error = richardson(*second)
            return _clip_variance(raw - mean ** 2, raw_error + 2 * abs(mean) * mean_error)

        return _Plan(request, list(dict.fromkeys(nodes.values())), combine)

    if kind is MomentKind.CROSS_QL:
        nodes = {(step, k): _lambda_point(model, t, j, k * step, {i: step}) for step in steps for k in (0, 1, 2)}

        def combine(values):
            g = {key: np.imag(values[node]) / key[0] for key, node in nodes.items()}
            estimates = [(-3 * g[(step, 0)] + 4 * g[(step, 1)] - g[(step, 2)]) / (2 * step) for step in steps]
            value, error = richardson(*[-e for e in estimates])
            return value, error, False

        return _Plan(request, list(nodes.values()), combine)

    if kind is MomentKind.CROSS_QQ:
        if i == j:
            nodes = {(step, sign): _angle_point(model, t, {i: step * (1 + sign)}) for step in steps for sign in (1, -1)}
        else:
            nodes = {(step, sign): _angle_point(model, t, {i: step, j: sign * step}) for step in steps for sign in (1, -1)}
    else:
        nodes = {(step, sign): _two_time_point(model, t, request.tau, i, j, step, sign * step)
                 for step in steps for sign in (1, -1)}

    def combine(values):
        estimates = [-(np.real(values[nodes[(step, 1)]]) - np.real(values[nodes[(step, -1)]])) / (2 * step ** 2)
                     for step in steps]
        value, error = richardson(*estimates)
        return value, error, False

    return _Plan(request, list(nodes.values()), combine)


def _exact_at_origin(model: HawkesModel, request: MomentRequest) -> float:
    """Q(0) = 0 and lambda(0) = lambda_inf"""
    if request.kind is MomentKind.MEAN_LAMBDA:
        return float(model.base_rates[request.i])
    return 0.0


def _evaluate(model: HawkesModel, requests: Sequence[MomentRequest], grid_steps: Optional[int],
              workers: Optional[int], mark_coupling: Optional[MarkCoupling]) -> List[MomentEstimate]:
    for request in requests:
        for index in (request.i, request.j):
            if index is not None and index >= model.d:
                raise DomainError("moment", f"component {index + 1} outside 1..{model.d}")

    plans = [_plan(model, r) for r in requests if r.t > 0]
    points = sorted({point for plan in plans for point in plan.points}, key=repr)
    options = {"tol": get_settings().moment_tol, "mark_coupling": mark_coupling}
    with timed(f"moment stencils ({len(points)} transform evaluations)"):
        results = parallel_map(_transform_point, [(model, point, grid_steps, options) for point in points], workers)
    values = dict(zip(points, results))

    planned = {id(plan.request): plan for plan in plans}
    estimates = []
    for request in requests:
        plan = planned.get(id(request))
        if plan is None:
            estimates.append(MomentEstimate(request, _exact_at_origin(model, request), 0.0))
            continue
        value, error, clipped = plan.combine(values)
        estimates.append(MomentEstimate(request, float(value), float(error), clipped))
    return estimates


# ============================================================================
# PUBLIC API
# ============================================================================

def moment(model: HawkesModel, request: MomentRequest, grid_steps: Optional[int] = None,
           workers: Optional[int] = None, mark_coupling: Optional[MarkCoupling] = None) -> MomentEstimate:
    """
    One moment with a Richardson error estimate

    The underlying fixed points run at Settings.moment_tol so that solver noise
    stays well below the stencil truncation error.
    """
    require_stable(model, "moment")
    return _evaluate(model, [request], grid_steps, workers, mark_coupling)[0]


def moment_table(model: HawkesModel, t_grid, statistics: Sequence[str], tau: Optional[float] = None,
                 stencil: Optional[float] = None, grid_steps: Optional[int] = None, workers: Optional[int] = None,
                 mark_coupling: Optional[MarkCoupling] = None) -> pd.DataFrame:
    """
    Transform-route moments on a time grid

    Returns:
        Table with columns t, statistic, value, error_estimate; statistic codes
        match those of simulate.mc_moments
    """
    require_stable(model, "moment_table")
    requests = [MomentRequest.from_statistic(code, float(t), tau, stencil) for t in t_grid for code in statistics]
    estimates = _evaluate(model, requests, grid_steps, workers, mark_coupling)
    rows = [(e.request.t, e.request.statistic, e.value, e.error_estimate) for e in estimates]
    logger.info(f"Moment table: {len(statistics)} statistics on {len(t_grid)} times")
    return pd.DataFrame(rows, columns=["t", "statistic", "value", "error_estimate"])


def mean_via_renewal(model: HawkesModel, i: int, t: float, process: Process = Process.Q,
                     grid_steps: Optional[int] = None) -> float:
    """
    First moment from the renewal solution

        E[Q_i(t)] = sum_j lambda_j,inf int_0^t R^Q_ij(u) du
        E[lambda_i(t)] = lambda_i,inf + sum_j lambda_j,inf int_0^t R^lambda_ij(u) du
    """
    if not 0 <= i < model.d:
        raise DomainError("mean_via_renewal", f"component {i} outside [0, {model.d})")
    if t < 0:
        raise DomainError("mean_via_renewal", "t must be non-negative")
    process = Process(process)
    working = model.with_infinite_sojourns() if process is Process.N else model
    lam = working.base_rates
    if t == 0:
        require_stable(working, "mean_via_renewal")
        return float(lam[i]) if process is Process.LAMBDA else 0.0

    solution = solve_renewal(working, Grid(t, grid_steps or get_settings().grid_steps))
    if process is Process.LAMBDA:
        return float(lam[i] + np.dot(lam, solution.integrals(Process.LAMBDA)[i]))
    return float(np.dot(lam, solution.integrals(Process.Q)[i]))


def decorrelation_horizon(model: HawkesModel) -> float:
    """Lag after which two-time moments are treated as decorrelated: 20 / (1 - rho)"""
    branching = require_stable(model, "decorrelation_horizon")
    return 20.0 / (1.0 - branching.spectral_radius)
