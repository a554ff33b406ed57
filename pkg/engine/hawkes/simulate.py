"""
Exact simulation of Hawkes paths (thinning and cluster samplers) and Monte Carlo estimators
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

from .config import get_settings
from .enums import KernelType, Process, Sampler
from .exceptions import DomainError, EventCapExceededError
from .model import require_stable
from .performance import batched, parallel_map, timed
from .schemas import HawkesModel

logger = logging.getLogger(__name__)

# independent RNG streams per sampler for the same (seed, replication)
_THINNING_STREAM = 0
_CLUSTER_STREAM = 1
_SINGLE_CLUSTER_STREAM = 2

# fixed so that Monte Carlo output does not depend on the worker count
MC_CHUNK_SIZE = 250


def make_rng(seed: int, replication: int = 0, stream: int = 0) -> np.random.Generator:
    """Counter-based Philox generator keyed by (seed, replication, stream)"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replication), int(stream)])))


# ============================================================================
# PATH TYPES
# ============================================================================

@dataclass(frozen=True)
class EventRecord:
    event_id: int
    time: float
    component: int
    sojourn: float
    generation: int
    parent: Optional[int]


@dataclass(frozen=True)
class SamplePath:
    """
    Event records of one path, stored column-wise

    marks[r, i] is the jump B_{i k_r} drawn at event r for target i; it is the
    same realization used for branching in the cluster sampler.
    """
    horizon: float
    seed: int
    replication: int
    d: int
    times: np.ndarray
    components: np.ndarray
    sojourns: np.ndarray
    generations: np.ndarray
    parents: np.ndarray
    marks: np.ndarray
    acceptance_intensity: Optional[np.ndarray] = None

    @property
    def n_events(self) -> int:
        return int(self.times.shape[0])

    @property
    def events(self) -> List[EventRecord]:
        return [
            EventRecord(
                event_id=r,
                time=float(self.times[r]),
                component=int(self.components[r]),
                sojourn=float(self.sojourns[r]),
                generation=int(self.generations[r]),
                parent=None if self.parents[r] < 0 else int(self.parents[r]),
            )
            for r in range(self.n_events)
        ]

    def to_frame(self) -> pd.DataFrame:
        """Export table with 1-based components and empty parent for immigrants"""
        return pd.DataFrame({
            "event_id": np.arange(self.n_events, dtype=np.int64),
            "time": self.times,
            "component": self.components.astype(np.int64) + 1,
            "generation": self.generations.astype(np.int64),
            "parent_id": pd.Series(self.parents, dtype="Int64").mask(self.parents < 0),
            "sojourn": self.sojourns,
        })


@dataclass(frozen=True)
class ClusterSample:
    source: int
    u_grid: np.ndarray
    counts_Q: np.ndarray
    load_lambda: np.ndarray
    n_events: int


@dataclass(frozen=True)
class PathState:
    N: np.ndarray
    Q: np.ndarray
    intensity: np.ndarray


class _EventBuffer:
    """Growable column store used while a path is being sampled"""

    def __init__(self, d: int, capacity: int = 64):
        self.d = d
        self.size = 0
        self.times = np.empty(capacity)
        self.components = np.empty(capacity, dtype=np.int64)
        self.sojourns = np.empty(capacity)
        self.generations = np.empty(capacity, dtype=np.int64)
        self.parents = np.empty(capacity, dtype=np.int64)
        self.marks = np.empty((capacity, d))

    def _grow(self):
        capacity = 2 * self.times.shape[0]
        for name in ("times", "components", "sojourns", "generations", "parents", "marks"):
            old = getattr(self, name)
            new = np.empty((capacity,) + old.shape[1:], dtype=old.dtype)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def add(self, time: float, component: int, sojourn: float, generation: int, parent: int, marks) -> int:
        if self.size == self.times.shape[0]:
            self._grow()
        r = self.size
        self.times[r] = time
        self.components[r] = component
        self.sojourns[r] = sojourn
        self.generations[r] = generation
        self.parents[r] = parent
        self.marks[r] = marks
        self.size += 1
        return r

    def view(self, name: str) -> np.ndarray:
        return getattr(self, name)[: self.size]


def _draw_marks(model: HawkesModel, source: int, rng: np.random.Generator) -> np.ndarray:
    return np.array([model.jump(i, source).sample(rng) for i in range(model.d)], dtype=float)


def _excitation(model: HawkesModel, eval_times: np.ndarray, times: np.ndarray, components: np.ndarray,
                marks: np.ndarray, inclusive: bool = False) -> np.ndarray:
    """
    sum_r marks[r, i] g_{i k_r}(t - T_r) for every evaluation time t

    Only events strictly before t contribute unless inclusive, in which case an
    event at exactly t contributes g(0).
    """
    eval_times = np.atleast_1d(np.asarray(eval_times, dtype=float))
    load = np.zeros((eval_times.shape[0], model.d))
    if times.shape[0] == 0:
        return load
    for k in range(model.d):
        mask = components == k
        if not mask.any():
            continue
        lag = eval_times[:, None] - times[mask][None, :]
        active = lag >= 0 if inclusive else lag > 0
        safe_lag = np.where(active, lag, 0.0)
        for i in range(model.d):
            if model.jump(i, k).is_zero:
                continue
            weights = model.kernel(i, k).value(safe_lag) * active
            load[:, i] += weights @ marks[mask, i]
    return load


class _ExcitationTracker:
    """
    Excitation at increasing times for a path that only grows at its end

    Exponential pairs carry a decayed state per (target, source) that is
    updated in O(d^2) per step; power-law pairs are summed over the past
    events of their source.
    """

    def __init__(self, model: HawkesModel):
        d = model.d
        self.model = model
        self.decay = np.zeros((d, d))
        self.recursive = np.zeros((d, d), dtype=bool)
        self.direct: List[Tuple[int, int]] = []
        for i in range(d):
            for k in range(d):
                kernel = model.kernel(i, k)
                if model.jump(i, k).is_zero or kernel.kind is KernelType.ZERO:
                    continue
                if kernel.kind is KernelType.EXPONENTIAL:
                    self.decay[i, k] = kernel.alpha
                    self.recursive[i, k] = True
                else:
                    self.direct.append((i, k))
        self.state = np.zeros((d, d))
        self.clock = 0.0

    def at(self, t: float, buffer: _EventBuffer) -> np.ndarray:
        """Excitation from events strictly before t; t must not precede the last call"""
        self.state *= np.exp(-self.decay * (t - self.clock))
        self.clock = t
        load = self.state.sum(axis=1)
        if self.direct:
            times, components, marks = buffer.view("times"), buffer.view("components"), buffer.view("marks")
            for i, k in self.direct:
                mask = components == k
                load[i] += self.model.kernel(i, k).value(t - times[mask]) @ marks[mask, i]
        return load

    def record(self, k: int, marks: np.ndarray):
        """Event of component k at the time of the last call"""
        self.state[:, k] += np.where(self.recursive[:, k], marks, 0.0)


def _check_horizon(horizon: float):
    if not (np.isfinite(horizon) and horizon > 0):
        raise DomainError("simulate", f"horizon must be positive (got {horizon})")


# ============================================================================
# THINNING
# ============================================================================

def simulate_thinning(model: HawkesModel, horizon: float, seed: int, replication: int = 0,
                      max_events: Optional[int] = None) -> SamplePath:
    """
    Ogata thinning with the post-event intensity as dominating rate

    Both kernel families are non-increasing, so the intensity right after the
    latest accepted event bounds the intensity until the next one.
    """
    require_stable(model, "simulate_thinning")
    _check_horizon(horizon)
    return _thinning_path(model, horizon, seed, replication, max_events or get_settings().max_events)


def _thinning_path(model: HawkesModel, horizon: float, seed: int, replication: int, cap: int) -> SamplePath:
    rng = make_rng(seed, replication, _THINNING_STREAM)
    d = model.d
    base = model.base_rates
    kernel_at_zero = np.array([[model.kernel(i, k).value(0.0) for k in range(d)] for i in range(d)])
    buffer = _EventBuffer(d)
    tracker = _ExcitationTracker(model)
    accepted_intensity = []

    t = 0.0
    bound = base.sum()
    while True:
        t += rng.exponential(1.0 / bound)
        if t > horizon:
            break
        intensity = base + tracker.at(t, buffer)
        total = intensity.sum()
        if rng.uniform() * bound <= total:
            k = min(int(np.searchsorted(np.cumsum(intensity), rng.uniform() * total, side="right")), d - 1)
            marks = _draw_marks(model, k, rng)
            sojourn = model.sojourns[k].sample(rng)
            buffer.add(t, k, sojourn, 0, -1, marks)
            tracker.record(k, marks)
            accepted_intensity.append(intensity)
            if buffer.size > cap:
                raise EventCapExceededError(cap, "thinning")
            bound = total + float(marks @ kernel_at_zero[:, k])
        else:
            bound = total

    return SamplePath(
        horizon=horizon,
        seed=seed,
        replication=replication,
        d=d,
        times=buffer.view("times").copy(),
        components=buffer.view("components").copy(),
        sojourns=buffer.view("sojourns").copy(),
        generations=buffer.view("generations").copy(),
        parents=buffer.view("parents").copy(),
        marks=buffer.view("marks").copy(),
        acceptance_intensity=np.array(accepted_intensity).reshape(-1, d),
    )


# ============================================================================
# CLUSTER REPRESENTATION
# ============================================================================

def _spawn(model: HawkesModel, buffer: _EventBuffer, parent: int, horizon: float, rng: np.random.Generator):
    """Offspring of one event: Poisson(mark * G(u)) children per target, offsets from g / G(u) on [0, u]"""
    time = buffer.times[parent]
    source = int(buffer.components[parent])
    remaining = horizon - time
    children = []
    if remaining <= 0:
        return children
    marks = buffer.marks[parent].copy()
    for m in range(model.d):
        if marks[m] <= 0:
            continue
        kernel = model.kernel(m, source)
        mass = float(kernel.integral(remaining))
        count = rng.poisson(marks[m] * mass)
        if count == 0:
            continue
        # (1 - U) lies in (0, 1], so offsets are strictly positive
        levels = (1.0 - rng.uniform(size=count)) * mass
        offsets = np.minimum(kernel.inverse_integral(levels), remaining)
        children.extend((time + float(v), m) for v in offsets)
    return children


def _grow_clusters(model: HawkesModel, buffer: _EventBuffer, horizon: float, rng: np.random.Generator,
                   cap: int, sampler: str):
    queue = deque(range(buffer.size))
    while queue:
        parent = queue.popleft()
        generation = buffer.generations[parent] + 1
        for child_time, m in _spawn(model, buffer, parent, horizon, rng):
            child = buffer.add(child_time, m, model.sojourns[m].sample(rng), generation, parent,
                               _draw_marks(model, m, rng))
            if buffer.size > cap:
                raise EventCapExceededError(cap, sampler)
            queue.append(child)


def simulate_cluster(model: HawkesModel, horizon: float, seed: int, replication: int = 0,
                     max_events: Optional[int] = None) -> SamplePath:
    """Poisson immigrants per component, each growing a branching cascade until the horizon"""
    require_stable(model, "simulate_cluster")
    _check_horizon(horizon)
    return _cluster_path(model, horizon, seed, replication, max_events or get_settings().max_events)


def _cluster_path(model: HawkesModel, horizon: float, seed: int, replication: int, cap: int) -> SamplePath:
    rng = make_rng(seed, replication, _CLUSTER_STREAM)
    buffer = _EventBuffer(model.d)
    for j in range(model.d):
        count = rng.poisson(model.lambda_inf[j] * horizon)
        for arrival in np.sort(rng.uniform(0.0, horizon, size=count)):
            buffer.add(arrival, j, model.sojourns[j].sample(rng), 0, -1, _draw_marks(model, j, rng))
    _grow_clusters(model, buffer, horizon, rng, cap, "cluster")

    order = np.argsort(buffer.view("times"), kind="stable")
    new_id = np.empty_like(order)
    new_id[order] = np.arange(order.shape[0])
    parents = buffer.view("parents")[order]
    parents = np.where(parents >= 0, new_id[np.maximum(parents, 0)], -1)

    return SamplePath(
        horizon=horizon,
        seed=seed,
        replication=replication,
        d=model.d,
        times=buffer.view("times")[order].copy(),
        components=buffer.view("components")[order].copy(),
        sojourns=buffer.view("sojourns")[order].copy(),
        generations=buffer.view("generations")[order].copy(),
        parents=parents,
        marks=buffer.view("marks")[order].copy(),
    )


def simulate_single_cluster(model: HawkesModel, j: int, horizon: float, seed: int,
                            u_grid: Optional[Sequence[float]] = None, replication: int = 0,
                            max_events: Optional[int] = None) -> ClusterSample:
    """
    One cluster rooted at an immigrant of component j at time 0

    counts_Q[k, i] counts cluster members of component i present at age u_k
    (the root included, with its own sojourn); load_lambda[k, i] is the
    intensity the cluster adds to component i at age u_k, the root's own jump
    contributing from age 0 on.
    """
    require_stable(model, "simulate_single_cluster")
    _check_horizon(horizon)
    if not 0 <= j < model.d:
        raise DomainError("simulate_single_cluster", f"source component {j} outside [0, {model.d})")
    grid = np.linspace(0.0, horizon, 65) if u_grid is None else np.asarray(u_grid, dtype=float)
    if np.any(grid < 0) or np.any(grid > horizon):
        raise DomainError("simulate_single_cluster", "u grid must lie within [0, horizon]")
    cap = max_events or get_settings().max_events

    rng = make_rng(seed, replication, _SINGLE_CLUSTER_STREAM + 10 * j)
    buffer = _EventBuffer(model.d)
    buffer.add(0.0, j, model.sojourns[j].sample(rng), 0, -1, _draw_marks(model, j, rng))
    _grow_clusters(model, buffer, horizon, rng, cap, "single-cluster")

    times = buffer.view("times")
    components = buffer.view("components")
    sojourns = buffer.view("sojourns")
    present = (times[None, :] <= grid[:, None]) & (times[None, :] + sojourns[None, :] > grid[:, None])
    counts = np.stack([(present & (components == i)[None, :]).sum(axis=1) for i in range(model.d)], axis=1)
    load = _excitation(model, grid, times, components, buffer.view("marks"), inclusive=True)
    return ClusterSample(source=j, u_grid=grid, counts_Q=counts.astype(np.int64), load_lambda=load,
                         n_events=buffer.size)


SAMPLERS: Dict[Sampler, Callable[..., SamplePath]] = {
    Sampler.THINNING: simulate_thinning,
    Sampler.CLUSTER: simulate_cluster,
}

_PATH_BUILDERS = {
    Sampler.THINNING: _thinning_path,
    Sampler.CLUSTER: _cluster_path,
}


# ============================================================================
# PATH STATE
# ============================================================================

def path_states(path: SamplePath, model: HawkesModel, t_grid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(N, Q, lambda) at every time of t_grid, each of shape (len(t_grid), d)"""
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t_grid < 0) or np.any(t_grid > path.horizon):
        raise DomainError("path_state", f"times must lie within [0, {path.horizon}]")
    arrived = path.times[None, :] <= t_grid[:, None]
    departed = path.times[None, :] + path.sojourns[None, :] <= t_grid[:, None]
    N = np.zeros((t_grid.shape[0], model.d))
    Q = np.zeros((t_grid.shape[0], model.d))
    for i in range(model.d):
        mine = (path.components == i)[None, :]
        N[:, i] = (arrived & mine).sum(axis=1)
        Q[:, i] = (arrived & ~departed & mine).sum(axis=1)
    intensity = model.base_rates[None, :] + _excitation(model, t_grid, path.times, path.components, path.marks)
    return N, Q, intensity


def path_state(path: SamplePath, model: HawkesModel, t: float) -> PathState:
    N, Q, intensity = path_states(path, model, [t])
    return PathState(N=N[0], Q=Q[0], intensity=intensity[0])


# ============================================================================
# MONTE CARLO ESTIMATORS
# ============================================================================

@dataclass
class MomentAccumulator:
    """Power sums over replications; merging two accumulators is elementwise addition"""
    count: int
    q_sums: np.ndarray       # (4, n_t, d): sums of Q, Q^2, Q^3, Q^4
    l_sums: np.ndarray       # (4, n_t, d)
    qq_sums: np.ndarray      # (2, n_t, d, d): sums of Q_i Q_j and (Q_i Q_j)^2
    ql_sums: np.ndarray      # (2, n_t, d, d): sums of Q_i lambda_j and its square

    @classmethod
    def empty(cls, n_t: int, d: int) -> "MomentAccumulator":
        return cls(0, np.zeros((4, n_t, d)), np.zeros((4, n_t, d)), np.zeros((2, n_t, d, d)), np.zeros((2, n_t, d, d)))

    def add(self, Q: np.ndarray, intensity: np.ndarray):
        self.count += 1
        for power in range(4):
            self.q_sums[power] += Q ** (power + 1)
            self.l_sums[power] += intensity ** (power + 1)
        qq = Q[:, :, None] * Q[:, None, :]
        ql = Q[:, :, None] * intensity[:, None, :]
        self.qq_sums[0] += qq
        self.qq_sums[1] += qq ** 2
        self.ql_sums[0] += ql
        self.ql_sums[1] += ql ** 2

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        return MomentAccumulator(
            self.count + other.count,
            self.q_sums + other.q_sums,
            self.l_sums + other.l_sums,
            self.qq_sums + other.qq_sums,
            self.ql_sums + other.ql_sums,
        )


def _mean_and_error(first, second, n):
    mean = first / n
    variance = np.maximum(second / n - mean ** 2, 0.0) * n / (n - 1)
    return mean, np.sqrt(variance / n)


def _variance_and_error(sums, n):
    mean = sums[0] / n
    raw2, raw3, raw4 = sums[1] / n, sums[2] / n, sums[3] / n
    m2 = np.maximum(raw2 - mean ** 2, 0.0)
    m4 = np.maximum(raw4 - 4 * mean * raw3 + 6 * mean ** 2 * raw2 - 3 * mean ** 4, 0.0)
    variance = m2 * n / (n - 1)
    error = np.sqrt(np.maximum(m4 - m2 ** 2 * (n - 3) / (n - 1), 0.0) / n)
    return variance, error


def moment_rows(accumulator: MomentAccumulator, t_grid: np.ndarray) -> pd.DataFrame:
    n = accumulator.count
    d = accumulator.q_sums.shape[-1]
    mean_q, se_mean_q = _mean_and_error(accumulator.q_sums[0], accumulator.q_sums[1], n)
    mean_l, se_mean_l = _mean_and_error(accumulator.l_sums[0], accumulator.l_sums[1], n)
    var_q, se_var_q = _variance_and_error(accumulator.q_sums, n)
    var_l, se_var_l = _variance_and_error(accumulator.l_sums, n)
    cross_qq, se_qq = _mean_and_error(accumulator.qq_sums[0], accumulator.qq_sums[1], n)
    cross_ql, se_ql = _mean_and_error(accumulator.ql_sums[0], accumulator.ql_sums[1], n)

    rows = []
    for k, t in enumerate(t_grid):
        for i in range(d):
            rows.append((t, f"mean_Q_{i + 1}", mean_q[k, i], se_mean_q[k, i]))
            rows.append((t, f"var_Q_{i + 1}", var_q[k, i], se_var_q[k, i]))
            rows.append((t, f"mean_lambda_{i + 1}", mean_l[k, i], se_mean_l[k, i]))
            rows.append((t, f"var_lambda_{i + 1}", var_l[k, i], se_var_l[k, i]))
        for i in range(d):
            for j in range(i + 1, d):
                rows.append((t, f"cross_QQ_{i + 1}_{j + 1}", cross_qq[k, i, j], se_qq[k, i, j]))
        for i in range(d):
            for j in range(d):
                rows.append((t, f"cross_QL_{i + 1}_{j + 1}", cross_ql[k, i, j], se_ql[k, i, j]))
    return pd.DataFrame(rows, columns=["t", "statistic", "value", "error_estimate"])


def _sample_states(model, sampler, seed, replication, t_grid, cap):
    horizon = float(t_grid.max())
    if horizon <= 0:
        zeros = np.zeros((t_grid.shape[0], model.d))
        return zeros, zeros, np.tile(model.base_rates, (t_grid.shape[0], 1))
    path = _PATH_BUILDERS[sampler](model, horizon, seed, replication, cap)
    return path_states(path, model, t_grid)


def _moment_chunk(task) -> MomentAccumulator:
    model, t_grid, seed, sampler, replications, cap = task
    accumulator = MomentAccumulator.empty(t_grid.shape[0], model.d)
    for replication in replications:
        _, Q, intensity = _sample_states(model, sampler, seed, replication, t_grid, cap)
        accumulator.add(Q, intensity)
    return accumulator


def mc_moments(model: HawkesModel, t_grid, runs: int, seed: int, sampler: Sampler = Sampler.CLUSTER,
               workers: Optional[int] = None, max_events: Optional[int] = None) -> pd.DataFrame:
    """
    Monte Carlo means, variances and cross-moments of Q and lambda with standard errors

    Args:
        model: Stable model
        t_grid: Evaluation times (>= 0)
        runs: Number of independent replications (>= 2)
        seed: Base seed; replication r uses its own stream keyed by (seed, r)
        sampler: Path sampler
        workers: Worker processes (None: Settings.threads)

    Returns:
        Table with columns t, statistic, value, error_estimate
    """
    require_stable(model, "mc_moments")
    if runs < 2:
        raise DomainError("mc_moments", "at least two runs are needed")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(t_grid < 0):
        raise DomainError("mc_moments", "t_grid must be a non-empty list of non-negative times")
    cap = max_events or get_settings().max_events

    tasks = [(model, t_grid, seed, Sampler(sampler), chunk, cap)
             for chunk in batched(range(runs), MC_CHUNK_SIZE)]
    with timed(f"mc_moments ({runs} runs, {sampler})"):
        partials = parallel_map(_moment_chunk, tasks, workers)

    total = MomentAccumulator.empty(t_grid.shape[0], model.d)
    for partial in partials:
        total = total.merge(partial)
    logger.info(f"Monte Carlo moments from {total.count} runs on {t_grid.shape[0]} times")
    return moment_rows(total, t_grid)


def wilson_interval(successes, trials: int, confidence: float = 0.95) -> Tuple[np.ndarray, np.ndarray]:
    successes = np.asarray(successes, dtype=float)
    z = norm.ppf(0.5 + confidence / 2)
    p = successes / trials
    denominator = 1 + z ** 2 / trials
    center = (p + z ** 2 / (2 * trials)) / denominator
    half = z * np.sqrt(p * (1 - p) / trials + z ** 2 / (4 * trials ** 2)) / denominator
    return np.clip(center - half, 0.0, 1.0), np.clip(center + half, 0.0, 1.0)


def _tail_chunk(task) -> np.ndarray:
    model, t, thresholds, seed, sampler, replications, cap = task
    exceed = np.zeros((3, thresholds.shape[0], model.d), dtype=np.int64)
    for replication in replications:
        N, Q, intensity = _sample_states(model, sampler, seed, replication, np.array([t]), cap)
        for p, values in enumerate((N[0], Q[0], intensity[0])):
            exceed[p] += values[None, :] > thresholds[:, None]
    return exceed


def mc_tail(model: HawkesModel, t: float, thresholds, runs: int, seed: int,
            processes: Sequence[Process] = (Process.N, Process.Q, Process.LAMBDA),
            sampler: Sampler = Sampler.CLUSTER, workers: Optional[int] = None,
            max_events: Optional[int] = None) -> pd.DataFrame:
    """
    Empirical P(X_i(t) > x) with Wilson intervals for X in N, Q, lambda

    Rows whose estimate is below 10 / runs carry low_count = True.
    """
    require_stable(model, "mc_tail")
    if runs < 2:
        raise DomainError("mc_tail", "at least two runs are needed")
    if t < 0:
        raise DomainError("mc_tail", "t must be non-negative")
    thresholds = np.asarray(thresholds, dtype=float)
    cap = max_events or get_settings().max_events

    tasks = [(model, float(t), thresholds, seed, Sampler(sampler), chunk, cap)
             for chunk in batched(range(runs), MC_CHUNK_SIZE)]
    with timed(f"mc_tail ({runs} runs, t={t})"):
        partials = parallel_map(_tail_chunk, tasks, workers)
    exceed = np.sum(partials, axis=0)

    order = [Process.N, Process.Q, Process.LAMBDA]
    rows = []
    for process in processes:
        p = order.index(Process(process))
        lo, hi = wilson_interval(exceed[p], runs)
        for k, x in enumerate(thresholds):
            for i in range(model.d):
                probability = exceed[p, k, i] / runs
                rows.append((x, i + 1, Process(process).value, int(exceed[p, k, i]), probability,
                             lo[k, i], hi[k, i], bool(probability < 10 / runs)))
    frame = pd.DataFrame(rows, columns=["x", "component", "process", "exceedances", "probability",
                                        "ci_lo", "ci_hi", "low_count"])
    if frame["low_count"].any():
        logger.warning(f"mc_tail: some probabilities are below 10/runs = {10 / runs:.2e}; increase runs")
    return frame
