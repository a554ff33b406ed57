"""
Fixed-point computation of cluster transforms and assembly of the joint transforms of (Q, lambda) and (N, lambda)
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from cachetools import LRUCache, cached

from .config import get_settings
from .enums import MarkCoupling
from .exceptions import ClaimTransformError, DomainError, NonConvergenceError
from .model import branching_matrix, jump_lst, require_stable
from .performance import parallel_map, timed
from .quadrature import Grid, trapezoid_convolution
from .schemas import HawkesModel

logger = logging.getLogger(__name__)

_UNIT_DISC_SLACK = 1e-12


# ============================================================================
# QUERIES AND FIELDS
# ============================================================================

@dataclass(frozen=True)
class TransformQuery:
    """Horizon t, LST arguments s >= 0 and pgf arguments |z| <= 1"""
    t: float
    s: Tuple[float, ...]
    z: Tuple[complex, ...]

    def __post_init__(self):
        if not (np.isfinite(self.t) and self.t >= 0):
            raise DomainError("TransformQuery", f"t must be a finite non-negative time (got {self.t})")
        if len(self.s) != len(self.z):
            raise DomainError("TransformQuery", "s and z must have the same dimension")
        s = np.asarray(self.s, dtype=float)
        if np.any(~np.isfinite(s)) or np.any(s < 0):
            raise DomainError("TransformQuery", "s must be finite and non-negative")
        if np.any(np.abs(np.asarray(self.z, dtype=complex)) > 1 + _UNIT_DISC_SLACK):
            raise DomainError("TransformQuery", "z must lie in the closed unit disc")

    @classmethod
    def build(cls, model: HawkesModel, t: float, s=None, z=None) -> "TransformQuery":
        s = np.zeros(model.d) if s is None else np.broadcast_to(np.asarray(s, dtype=float), (model.d,))
        z = np.ones(model.d) if z is None else np.broadcast_to(np.asarray(z, dtype=complex), (model.d,))
        return cls(float(t), tuple(float(v) for v in s), tuple(complex(v) for v in z))

    @property
    def s_array(self) -> np.ndarray:
        return np.asarray(self.s, dtype=float)

    @property
    def z_array(self) -> np.ndarray:
        return np.asarray(self.z, dtype=complex)


@dataclass(frozen=True)
class TransformField:
    """values[k, j] = cluster transform of a cluster rooted in j, observed at age u_k"""
    values: np.ndarray
    query: TransformQuery
    grid: Grid
    iterations: int = 0
    residual: float = float("inf")
    residual_trace: Tuple[float, ...] = field(default_factory=tuple)

    @classmethod
    def constant(cls, query: TransformQuery, grid: Grid, d: int, value=1.0) -> "TransformField":
        values = np.broadcast_to(np.asarray(value, dtype=complex), (grid.n + 1, d)).copy()
        return cls(values=values, query=query, grid=grid)


@dataclass(frozen=True)
class GridTables:
    kernel: np.ndarray       # (n+1, d, d): kernel[k, m, j] = g_mj(u_k)
    survival: np.ndarray     # (n+1, d): P(J_j > u_k)
    active: Tuple[Tuple[int, int], ...]


@cached(cache=LRUCache(maxsize=32))
def tabulate(model: HawkesModel, grid: Grid) -> GridTables:
    u = grid.u
    kernel = np.stack(
        [np.stack([model.kernel(m, j).value(u) for j in range(model.d)], axis=1) for m in range(model.d)],
        axis=1,
    )
    survival = np.stack([model.sojourns[j].survival(u) for j in range(model.d)], axis=1)
    kernel.setflags(write=False)
    survival.setflags(write=False)
    return GridTables(kernel=kernel, survival=survival, active=tuple(model.edges()))


def convergence_constant(model: HawkesModel) -> float:
    """M = d * max_ij E[B_ij] ||g_ij||, the rate in the factorial convergence bound"""
    return model.d * float(np.max(branching_matrix(model).entries))


def envelope_rate(model: HawkesModel) -> float:
    """K = max_j sum_m E[B_mj] g_mj(0); both kernel families peak at age 0"""
    peaks = np.array([[float(model.kernel(m, j).value(0.0)) for j in range(model.d)] for m in range(model.d)])
    return float(np.max(np.sum(model.mean_jumps() * peaks, axis=0)))


def convergence_envelope(model: HawkesModel, grid: Grid, iterations: int) -> np.ndarray:
    """
    Factorial majorant of the fixed-point residual trace

    Entry n - 1 bounds residual_n / residual_1 for the product-trapezoid map on
    this grid. It is K^(n-1) times the (n-1)-fold trapezoid convolution of 1,
    which tends to (K t)^(n-1) / (n-1)! as the grid is refined.
    """
    rate = envelope_rate(model)
    ones = np.ones(grid.n + 1)
    power = ones
    envelope = [1.0]
    for _ in range(1, iterations):
        power = rate * trapezoid_convolution(ones, power, grid.h)
        envelope.append(float(np.max(power)))
    return np.array(envelope)


# ============================================================================
# FIXED POINT
# ============================================================================

def phi_apply(model: HawkesModel, current: TransformField, mark_coupling: Optional[MarkCoupling] = None) -> TransformField:
    """
    One application of the cluster-transform map

    For a cluster rooted in j at age u: the root's presence factor
    1 - (1 - z_j) P(J_j > u), times, per target m, the jump expectation over
    B_mj of the intensity contribution s_m g_mj(u) and of the offspring term
    int_0^u g_mj(v) (1 - G_m(u - v)) dv.
    """
    coupling = MarkCoupling(mark_coupling or get_settings().mark_coupling)
    grid = current.grid
    query = current.query
    tables = tabulate(model, grid)
    s = query.s_array
    z = query.z_array

    offspring = trapezoid_convolution(tables.kernel, (1.0 - current.values)[:, :, None], grid.h)
    # |G| <= 1 keeps the real part non-negative up to rounding
    offspring = np.maximum(offspring.real, 0.0) + 1j * offspring.imag
    if not np.any(offspring.imag):
        offspring = offspring.real

    values = 1.0 - (1.0 - z[None, :]) * tables.survival
    for m, j in tables.active:
        jump = model.jump(m, j)
        load = s[m] * tables.kernel[:, m, j]
        if coupling is MarkCoupling.SHARED:
            values[:, j] *= jump_lst(jump, load + offspring[:, m, j])
        else:
            values[:, j] *= jump_lst(jump, load) * jump_lst(jump, offspring[:, m, j])

    return TransformField(values=np.asarray(values, dtype=complex), query=query, grid=grid)


def fixed_point(model: HawkesModel, query: TransformQuery, grid: Optional[Grid] = None,
                tol: Optional[float] = None, max_iter: Optional[int] = None, initial=1.0,
                mark_coupling: Optional[MarkCoupling] = None) -> TransformField:
    """
    Iterate the cluster-transform map to its fixed point

    Args:
        model: Stable model
        query: Transform arguments; query.t must be positive
        grid: Grid on [0, query.t] (default: Settings.grid_steps steps)
        tol: Sup-norm tolerance on successive iterates
        max_iter: Iteration cap
        initial: Starting field, a constant or an (n+1, d) array with entries in the unit disc

    Returns:
        Converged field with iteration count and residual trace
    """
    settings = get_settings()
    tol = tol or settings.fixed_point_tol
    max_iter = max_iter or settings.fixed_point_max_iter
    require_stable(model, "fixed_point")
    if query.t <= 0:
        raise DomainError("fixed_point", "the horizon must be positive")
    if len(query.s) != model.d:
        raise DomainError("fixed_point", f"query dimension {len(query.s)} does not match model dimension {model.d}")
    grid = grid or Grid(query.t, settings.grid_steps)
    if not np.isclose(grid.t, query.t, rtol=1e-12, atol=0):
        raise DomainError("fixed_point", f"grid horizon {grid.t} differs from query horizon {query.t}")

    current = TransformField.constant(query, grid, model.d, initial)
    trace: List[float] = []
    for iteration in range(1, max_iter + 1):
        updated = phi_apply(model, current, mark_coupling)
        residual = float(np.max(np.abs(updated.values - current.values)))
        trace.append(residual)
        current = updated
        if residual < tol:
            logger.debug(f"Fixed point converged in {iteration} iterations (residual {residual:.2e}, t={query.t})")
            return replace(current, iterations=iteration, residual=residual, residual_trace=tuple(trace))

    logger.warning(f"Fixed point stalled at residual {trace[-1]:.2e} after {max_iter} iterations")
    raise NonConvergenceError(max_iter, trace[-1], tol, trace)


# ============================================================================
# TRANSFORMS
# ============================================================================

def assemble_joint_transform(model: HawkesModel, solved: TransformField) -> complex:
    lam = model.base_rates
    query = solved.query
    integrals = solved.grid.integrate(solved.values, axis=0)
    exponent = np.sum(-lam * (query.t + query.s_array) + lam * integrals)
    return complex(np.exp(exponent))


@dataclass(frozen=True)
class TransformEvaluation:
    """Transform value with the convergence record of the fixed point(s) behind it"""
    value: complex
    iterations: int
    residual: float


def evaluate_joint_transform(model: HawkesModel, query: TransformQuery, grid: Optional[Grid] = None,
                             **options) -> TransformEvaluation:
    if query.t == 0:
        require_stable(model, "joint_transform")
        return TransformEvaluation(complex(np.exp(-np.dot(model.base_rates, query.s_array))), 0, 0.0)
    solved = fixed_point(model, query, grid, **options)
    return TransformEvaluation(assemble_joint_transform(model, solved), solved.iterations, solved.residual)


def joint_transform(model: HawkesModel, query: TransformQuery, grid: Optional[Grid] = None, **options) -> complex:
    """E[prod_i z_i^{Q_i(t)} exp(-s_i lambda_i(t))]"""
    return evaluate_joint_transform(model, query, grid, **options).value


def grid_for(t: float, grid_steps: Optional[int]) -> Optional[Grid]:
    if t <= 0:
        return None
    return Grid(t, grid_steps or get_settings().grid_steps)


def pgf_Q(model: HawkesModel, t: float, z, grid_steps: Optional[int] = None, **options) -> complex:
    query = TransformQuery.build(model, t, z=z)
    return joint_transform(model, query, grid_for(t, grid_steps), **options)


def lst_lambda(model: HawkesModel, t: float, s, grid_steps: Optional[int] = None, **options) -> float:
    query = TransformQuery.build(model, t, s=s)
    return joint_transform(model, query, grid_for(t, grid_steps), **options).real


def evaluate_joint_N_lambda(model: HawkesModel, t: float, s, z, grid_steps: Optional[int] = None,
                             **options) -> TransformEvaluation:
    counting = model.with_infinite_sojourns()
    query = TransformQuery.build(counting, t, s=s, z=z)
    return evaluate_joint_transform(counting, query, grid_for(t, grid_steps), **options)


def joint_N_lambda(model: HawkesModel, t: float, s, z, grid_steps: Optional[int] = None, **options) -> complex:
    """Joint transform of arrivals and intensity; sojourns play no role for N"""
    return evaluate_joint_N_lambda(model, t, s, z, grid_steps, **options).value


def two_time_pgf(model: HawkesModel, t: float, tau: float, y, z, grid_steps: Optional[int] = None,
                 **options) -> complex:
    """E[prod_i y_i^{Q_i(t)} z_i^{Q_i(t + tau)}]"""
    return evaluate_two_time_pgf(model, t, tau, y, z, grid_steps, **options).value


def evaluate_two_time_pgf(model: HawkesModel, t: float, tau: float, y, z, grid_steps: Optional[int] = None,
                          **options) -> TransformEvaluation:
    """
    Two-time pgf with the iterations of both solves summed and the larger final residual

    Clusters started before t are seen at both times (argument y z); clusters
    started in (t, t + tau] only at the later time (argument z).
    """
    if not (np.isfinite(tau) and tau > 0):
        raise DomainError("two_time_pgf", f"tau must be positive (got {tau})")
    lam = model.base_rates
    y = np.broadcast_to(np.asarray(y, dtype=complex), (model.d,))
    z = np.broadcast_to(np.asarray(z, dtype=complex), (model.d,))
    steps = grid_steps or get_settings().grid_steps

    exponent = 0.0 + 0.0j
    iterations, residual = 0, 0.0
    if t > 0:
        early = fixed_point(model, TransformQuery.build(model, t, z=y * z), Grid(t, steps), **options)
        exponent += np.sum(lam * early.grid.integrate(early.values - 1.0, axis=0))
        iterations, residual = early.iterations, early.residual

    late_grid = Grid(t + tau, steps)
    late = fixed_point(model, TransformQuery.build(model, t + tau, z=z), late_grid, **options)
    shifted = late.values - 1.0
    exponent += np.sum(lam * (late_grid.integrate(shifted, axis=0) - late_grid.integral_to(shifted, t)))
    return TransformEvaluation(complex(np.exp(exponent)), iterations + late.iterations, max(residual, late.residual))


def claim_lst(jump) -> Callable[[float], float]:
    """Claim-size LST evaluator built from a jump specification"""
    return lambda s: float(np.real(jump_lst(jump, s)))


def compound_lst(model: HawkesModel, t: float, s, claim_lsts: Sequence[Callable[[float], float]],
                 grid_steps: Optional[int] = None, **options) -> float:
    """
    LST of the compound process Z_i(t) = sum of claims U_i over the arrivals of N_i(t)

    Evaluated as the joint (N, lambda) transform at s = 0 and z_i = T{U_i}(s_i).
    """
    s = np.broadcast_to(np.asarray(s, dtype=float), (model.d,))
    if len(claim_lsts) != model.d:
        raise DomainError("compound_lst", f"need {model.d} claim LSTs")
    if np.any(s < 0):
        raise DomainError("compound_lst", "s must be non-negative")
    z = []
    for i, (evaluate, argument) in enumerate(zip(claim_lsts, s)):
        value = evaluate(float(argument))
        if not (np.isreal(value) and 0 < float(np.real(value)) <= 1):
            raise ClaimTransformError(i, value)
        z.append(float(np.real(value)))
    return joint_N_lambda(model, t, np.zeros(model.d), z, grid_steps, **options).real


# ============================================================================
# PMF RECOVERY
# ============================================================================

@dataclass(frozen=True)
class PmfResult:
    component: int
    t: float
    probabilities: np.ndarray
    renormalization_error: float
    tail_mass: float
    aliasing_warning: bool
    points: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"k": np.arange(self.probabilities.shape[0]), "probability": self.probabilities})


def _pgf_point(task) -> complex:
    model, t, i, z_i, grid_steps, options = task
    z = np.ones(model.d, dtype=complex)
    z[i] = z_i
    return pgf_Q(model, t, z, grid_steps, **options)


def pmf_Q(model: HawkesModel, t: float, i: int, max_k: int, grid_steps: Optional[int] = None,
          points: Optional[int] = None, workers: Optional[int] = None, **options) -> PmfResult:
    """
    P(Q_i(t) = k) for k = 0..max_k by discrete Fourier inversion of the pgf on the unit circle

    The pgf is evaluated at points >= 2 (max_k + 1) roots of unity; conjugate
    symmetry halves the number of fixed-point solves. Mass recovered beyond
    max_k estimates the truncated tail.
    """
    require_stable(model, "pmf_Q")
    if not 0 <= i < model.d:
        raise DomainError("pmf_Q", f"component {i} outside [0, {model.d})")
    if max_k < 0:
        raise DomainError("pmf_Q", "max_k must be non-negative")
    minimum = 2 * (max_k + 1)
    M = points or int(2 ** np.ceil(np.log2(minimum)))
    if M < minimum:
        raise DomainError("pmf_Q", f"need at least {minimum} points on the unit circle (got {M})")

    half = M // 2
    angles = 2 * np.pi * np.arange(half + 1) / M
    tasks = [(model, t, i, complex(np.exp(1j * theta)), grid_steps, options) for theta in angles]
    with timed(f"pmf_Q ({half + 1} pgf evaluations, t={t})"):
        upper = np.array(parallel_map(_pgf_point, tasks, workers), dtype=complex)

    spectrum = np.empty(M, dtype=complex)
    spectrum[: half + 1] = upper
    spectrum[half + 1:] = np.conj(upper[1: M - half][::-1])
    recovered = np.real(np.fft.fft(spectrum)) / M

    probabilities = np.clip(recovered[: max_k + 1], 0.0, 1.0)
    tail_mass = float(np.sum(np.clip(recovered[max_k + 1:], 0.0, None)))
    renormalization_error = float(abs(1.0 - probabilities.sum()))
    aliasing = tail_mass > get_settings().aliasing_tol
    if aliasing:
        logger.warning(f"pmf_Q: estimated mass {tail_mass:.2e} beyond k={max_k}; increase max_k")
    return PmfResult(component=i, t=t, probabilities=probabilities, renormalization_error=renormalization_error,
                     tail_mass=tail_mass, aliasing_warning=aliasing, points=M)


def richardson_ratio(model: HawkesModel, query: TransformQuery, steps: int, **options) -> float:
    """(J_n - J_{n/2}) / (J_{2n} - J_n); close to 4 for a second-order rule"""
    coarse, middle, fine = (
        joint_transform(model, query, Grid(query.t, n), **options) for n in (steps // 2, steps, 2 * steps)
    )
    return float(abs(middle - coarse) / abs(fine - middle))
