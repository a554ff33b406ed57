"""
Laplace-domain route for the renewal systems, used to cross-check the time-domain solver

Inversion follows the fixed Talbot contour and the de Hoog, Knight and Stokes
accelerated Fourier series as implemented in mpmath, rewritten in double
precision for vector-valued transforms.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from cachetools import LRUCache, cached
from scipy.integrate import IntegrationWarning, quad

from .enums import InversionMethod
from .exceptions import DomainError, NumericalError
from .quadrature import Grid
from .schemas import (
    DeterministicSojourn,
    ExponentialKernel,
    ExponentialSojourn,
    HawkesModel,
    InfiniteSojourn,
    PowerLawKernel,
    ZeroKernel,
)
from .tails import fractional_forcing, solve_renewal, solve_renewal_fractional, tail_indices

logger = logging.getLogger(__name__)

Transform = Callable[[complex], np.ndarray]


# ============================================================================
# INVERSION
# ============================================================================

def talbot(transform: Transform, times, degree: int = 34, r: Optional[float] = None) -> np.ndarray:
    """
    Fixed Talbot inversion

    Args:
        transform: r -> array of transform values; must be analytic left of the
            contour, which wraps around the negative real axis
        times: Positive evaluation times
        degree: Number of contour nodes
        r: Contour abscissa parameter (default 2 degree / 5)

    Returns:
        Array of shape (len(times),) + transform output shape
    """
    times = _positive_times(times, "talbot")
    M = degree
    r = 2 * M / 5 if r is None else r

    theta = np.pi * np.arange(M) / M
    cot = np.zeros(M)
    cot[1:] = 1 / np.tan(theta[1:])

    results = []
    for t in times:
        p = r / t * theta * (cot + 1j)
        p[0] = r / t
        values = np.stack([np.asarray(transform(pk), dtype=complex) for pk in p])
        weights = np.exp(t * p) * (1 + 1j * theta * (1 + cot ** 2) - 1j * cot)
        weights[0] = np.exp(r) / 2
        results.append(r / (M * t) * np.real(np.tensordot(weights, values, axes=1)))
    return np.stack(results)


def dehoog(transform: Transform, times, alpha: float = 0.0, tol: float = 1e-9, degree: int = 20) -> np.ndarray:
    """
    de Hoog, Knight and Stokes inversion

    Times are processed per decade with period T = 2 max(t); the abscissa
    alpha - log(tol) / (2T) stays right of every singularity when alpha bounds
    their real parts.
    """
    times = _positive_times(times, "dehoog")
    M = degree
    NP = 2 * M + 1
    decades = np.floor(np.log10(times)).astype(int)
    results = [None] * times.shape[0]

    for decade in np.unique(decades):
        positions = np.flatnonzero(decades == decade)
        T = 2 * times[positions].max()
        gamma = alpha - np.log(tol) / (2 * T)
        p = gamma + 1j * np.pi * np.arange(NP) / T
        sampled = [np.asarray(transform(pk), dtype=complex) for pk in p]
        shape = sampled[0].shape
        fp = np.stack([s.ravel() for s in sampled])
        active = np.any(np.abs(fp) > 0, axis=0)
        fp = fp[:, active]

        # quotient-difference table
        K = fp.shape[1]
        e = np.zeros((NP, M + 1, K), dtype=complex)
        q = np.zeros((NP, M, K), dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            q[0, 0] = fp[1] / (fp[0] / 2.0)
            q[1:2 * M, 0] = fp[2:2 * M + 1] / fp[1:2 * M]
            for rr in range(1, M + 1):
                mr = 2 * (M - rr)
                e[0:mr, rr] = q[1:mr + 1, rr - 1] - q[0:mr, rr - 1] + e[1:mr + 1, rr - 1]
                if rr != M:
                    mr = 2 * (M - rr - 1) + 1
                    q[0:mr, rr] = q[1:mr + 1, rr - 1] * e[1:mr + 1, rr] / e[0:mr, rr]

        d = np.zeros((NP, K), dtype=complex)
        d[0] = fp[0] / 2.0
        for rr in range(1, M + 1):
            d[2 * rr - 1] = -q[0, rr - 1]
            d[2 * rr] = -e[0, rr]

        for position in positions:
            t = times[position]
            z = np.exp(1j * np.pi * t / T)
            A_prev, A = np.zeros(K, dtype=complex), d[0].copy()
            B_prev, B = np.ones(K, dtype=complex), np.ones(K, dtype=complex)
            for k in range(1, 2 * M):
                A_prev, A = A, A + d[k] * A_prev * z
                B_prev, B = B, B + d[k] * B_prev * z
            # improved remainder of the continued fraction
            brem = (1.0 + (d[2 * M - 1] - d[2 * M]) * z) / 2.0
            rem = -brem * (1.0 - np.sqrt(1.0 + d[2 * M] * z / brem ** 2))
            A = A + rem * A_prev
            B = B + rem * B_prev

            flat = np.zeros(active.shape[0])
            flat[active] = np.exp(gamma * t) / T * np.real(A / B)
            results[position] = flat.reshape(shape)

    inverted = np.stack(results)
    if not np.all(np.isfinite(inverted)):
        raise NumericalError("de Hoog inversion produced non-finite values; adjust tol or degree")
    return inverted


_INVERTERS = {
    InversionMethod.TALBOT: talbot,
    InversionMethod.DEHOOG: dehoog,
}


def _positive_times(times, operation: str) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times <= 0) or np.any(~np.isfinite(times)):
        raise DomainError(operation, "inversion times must be positive and finite")
    return times


def default_inversion(model: HawkesModel) -> InversionMethod:
    """Talbot for rational transforms; de Hoog once a power-law kernel or a fixed delay appears"""
    rational_kernels = all(isinstance(k, (ExponentialKernel, ZeroKernel)) for row in model.kernels for k in row)
    rational_sojourns = not any(isinstance(s, DeterministicSojourn) for s in model.sojourns)
    return InversionMethod.TALBOT if rational_kernels and rational_sojourns else InversionMethod.DEHOOG


# ============================================================================
# TRANSFORMS
# ============================================================================

def kernel_transform(kernel, r: complex) -> complex:
    """int_0^inf exp(-r u) g(u) du"""
    if isinstance(kernel, ZeroKernel):
        return 0.0 + 0.0j
    if isinstance(kernel, ExponentialKernel):
        return 1.0 / (kernel.alpha + r)
    if isinstance(kernel, PowerLawKernel):
        if np.real(r) <= 0:
            raise DomainError("kernel_transform", "power-law kernels are transformed only for Re r > 0")
        return _power_law_transform(kernel.c, kernel.p, float(np.real(r)), float(np.imag(r)))
    raise DomainError("kernel_transform", f"unknown kernel {type(kernel).__name__}")


@cached(cache=LRUCache(maxsize=8192))
def _power_law_transform(c: float, p: float, a: float, b: float) -> complex:
    def damped(u):
        return (c + u) ** (-p) * np.exp(-a * u)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if b == 0.0:
            real, _ = quad(damped, 0, np.inf, limit=500)
            return complex(real, 0.0)
        real, _ = quad(damped, 0, np.inf, weight="cos", wvar=abs(b), limlst=200)
        sine, _ = quad(damped, 0, np.inf, weight="sin", wvar=abs(b), limlst=200)
    return complex(real, -np.sign(b) * sine)


def survival_transform(sojourn, r: complex) -> complex:
    """int_0^inf exp(-r u) P(J > u) du"""
    if isinstance(sojourn, InfiniteSojourn):
        return 1.0 / r
    if isinstance(sojourn, ExponentialSojourn):
        return 1.0 / (r + sojourn.mu)
    if isinstance(sojourn, DeterministicSojourn):
        return -np.expm1(-r * sojourn.tau) / r
    raise DomainError("survival_transform", f"unknown sojourn {type(sojourn).__name__}")


def branching_transform(model: HawkesModel, r: complex) -> np.ndarray:
    """G[m, j] = E[B_mj] L{g_mj}(r)"""
    means = model.mean_jumps()
    return np.array([[means[m, j] * kernel_transform(model.kernel(m, j), r) if means[m, j] else 0.0
                      for j in range(model.d)] for m in range(model.d)], dtype=complex)


def laplace_renewal(model: HawkesModel, r: complex) -> np.ndarray:
    """
    Transforms of R^Q and R^lambda at r, stacked as (2, d, d)

    Convolution turns the renewal systems into Z_Q = D (I - G)^-1 with
    D = diag(L{P(J_i > u)}) and Z_lambda = G (I - G)^-1.
    """
    G = branching_transform(model, r)
    resolvent = np.linalg.inv(np.eye(model.d) - G)
    D = np.diag([survival_transform(s, r) for s in model.sojourns])
    return np.stack([D @ resolvent, G @ resolvent])


def piecewise_linear_transform(values, h: float, r: complex) -> np.ndarray:
    """
    Exact transform of the piecewise-linear interpolant of grid samples, held
    constant after the last node
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0] - 1
    a = h * np.arange(n)
    E0 = np.exp(-r * a)
    E1 = np.exp(-r * (a + h))
    shape = (n,) + (1,) * (values.ndim - 1)
    f0, f1 = values[:-1], values[1:]
    level = ((E0 - E1) / r).reshape(shape)
    slope = ((E0 - E1) / r ** 2 - h * E1 / r).reshape(shape)
    return np.sum(f0 * level + (f1 - f0) / h * slope, axis=0) + values[-1] * np.exp(-r * n * h) / r


# ============================================================================
# CROSS-CHECKS
# ============================================================================

@dataclass(frozen=True)
class RenewalComparison:
    u: np.ndarray
    time_domain: np.ndarray
    laplace: np.ndarray
    method: InversionMethod

    @property
    def sup_error(self) -> float:
        return float(np.max(np.abs(self.time_domain - self.laplace)))


def _sample_indices(grid: Grid, points: int) -> np.ndarray:
    return np.unique(np.linspace(grid.n / points, grid.n, points).round().astype(int))


def invert_renewal(model: HawkesModel, u, method: Optional[InversionMethod] = None) -> np.ndarray:
    """R^Q and R^lambda at ages u > 0 by numerical inversion, shape (len(u), 2, d, d)"""
    method = InversionMethod(method or default_inversion(model))
    return _INVERTERS[method](lambda r: laplace_renewal(model, r), u)


def compare_renewal(model: HawkesModel, grid: Grid, points: int = 16,
                    method: Optional[InversionMethod] = None) -> RenewalComparison:
    method = InversionMethod(method or default_inversion(model))
    solution = solve_renewal(model, grid)
    indices = _sample_indices(grid, points)
    u = grid.u[indices]
    time_domain = np.stack([solution.RQ[indices], solution.RL[indices]], axis=1)
    comparison = RenewalComparison(u=u, time_domain=time_domain, laplace=invert_renewal(model, u, method),
                                   method=method)
    logger.info(f"Renewal cross-check ({method.value}): sup error {comparison.sup_error:.2e}")
    return comparison


def compare_fractional(model: HawkesModel, grid: Grid, i: int, points: int = 16) -> RenewalComparison:
    """
    Fractional systems of target i solved in the time domain and through the
    transform of their sampled forcing; values are stacked as (Q, lambda) over
    the columns of I_i
    """
    report = tail_indices(model, [i])
    base = solve_renewal(model, grid)
    solution = solve_renewal_fractional(model, grid, base, report, [i])
    forcing_Q, forcing_L = fractional_forcing(model, grid, base, report, i)
    I = list(report.sources[i])
    forcing = np.stack([forcing_Q, forcing_L], axis=1)   # (n+1, 2, |I|)

    def transform(r):
        G = branching_transform(model, r)[np.ix_(I, I)]
        return piecewise_linear_transform(forcing, grid.h, r) @ np.linalg.inv(np.eye(len(I)) - G)

    indices = _sample_indices(grid, points)
    u = grid.u[indices]
    time_domain = np.stack([solution.RQbar[indices][:, i, I], solution.RLbar[indices][:, i, I]], axis=1)
    return RenewalComparison(u=u, time_domain=time_domain, laplace=dehoog(transform, u),
                             method=InversionMethod.DEHOOG)
