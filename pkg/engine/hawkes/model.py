"""
Model primitives: validation, kernel/jump/sojourn evaluation, branching matrix and stability
"""
import logging
import warnings
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from cachetools import LRUCache, cached
from scipy.integrate import IntegrationWarning, quad

from .config import get_settings
from .exceptions import DomainError, ModelValidationError, QuadratureError, UnstableModelError
from .schemas import (
    ConstantJump,
    ExponentialJump,
    HawkesModel,
    ParetoJump,
    ValidationReport,
    ZeroJump,
)

logger = logging.getLogger(__name__)

# below this frequency the Fourier weights of QUADPACK are slower than plain quadrature
_OSCILLATION_THRESHOLD = 0.05
_QUADRATURE_ERROR_CEILING = 1e-7


@dataclass(frozen=True)
class BranchingMatrix:
    entries: np.ndarray
    spectral_radius: float

    @property
    def stable(self) -> bool:
        return self.spectral_radius < 1


# ============================================================================
# VALIDATION
# ============================================================================

def validate(model: HawkesModel) -> ValidationReport:
    """
    Check every admissibility constraint of a model

    Args:
        model: Model to check

    Returns:
        Report listing all violations; the spectral radius is attached when the
        model is otherwise admissible
    """
    violations: List[str] = []
    for i, rate in enumerate(model.lambda_inf):
        if not (np.isfinite(rate) and rate > 0):
            violations.append(f"base rate must be positive: lambda_inf[{i + 1}] = {rate}")

    for i in range(model.d):
        for j in range(model.d):
            for problem in model.kernel(i, j).violations():
                violations.append(f"kernel g{i + 1}{j + 1}: {problem}")
            for problem in model.jump(i, j).violations():
                violations.append(f"jump B{i + 1}{j + 1}: {problem}")
        for problem in model.sojourns[i].violations():
            violations.append(f"sojourn J{i + 1}: {problem}")

    report = ValidationReport(violations=violations)
    if report.is_valid:
        report.spectral_radius = branching_matrix(model).spectral_radius
    return report


def require_admissible(model: HawkesModel) -> None:
    report = validate(model)
    if not report.is_valid:
        raise ModelValidationError(report.violations)


def require_stable(model: HawkesModel, operation: str) -> BranchingMatrix:
    """Validate a model and insist on rho(||H||) < 1"""
    require_admissible(model)
    branching = branching_matrix(model)
    if not branching.stable:
        raise UnstableModelError(branching.spectral_radius, operation)
    return branching


# ============================================================================
# PRIMITIVES
# ============================================================================

def _check_time(operation: str, t) -> np.ndarray:
    values = np.asarray(t, dtype=float)
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise DomainError(operation, "time argument must be >= 0")
    return values


def _as_output(values, like):
    return values.item() if np.ndim(like) == 0 else values


def kernel_value(kernel, t):
    """g(t) for t >= 0 (scalar or array)"""
    values = _check_time("kernel_value", t)
    return _as_output(np.asarray(kernel.value(values)), t)


def kernel_integral(kernel, u):
    """Closed-form integral of g over [0, u]"""
    values = _check_time("kernel_integral", u)
    return _as_output(np.asarray(kernel.integral(values)), u)


def sojourn_survival(sojourn, u):
    """P(J > u); departure happens when the sojourn has fully elapsed"""
    values = _check_time("sojourn_survival", u)
    return _as_output(np.asarray(sojourn.survival(values)), u)


def jump_lst(jump, x):
    """
    Laplace-Stieltjes transform E[exp(-x B)] of a jump size

    Args:
        jump: Jump specification
        x: Argument(s); complex values with non-negative real part are admitted

    Returns:
        Transform value(s), real for real input and complex for complex input
    """
    arguments = np.asarray(x)
    if np.any(~np.isfinite(arguments)) or np.any(np.real(arguments) < 0):
        raise DomainError("jump_lst", "argument must be finite with non-negative real part")

    if isinstance(jump, ZeroJump):
        values = np.ones_like(arguments)
    elif isinstance(jump, ConstantJump):
        values = np.exp(-jump.b * arguments)
    elif isinstance(jump, ExponentialJump):
        values = 1.0 / (1.0 + jump.mean_size * arguments)
    elif isinstance(jump, ParetoJump):
        values = _pareto_lst(jump, arguments)
    else:
        raise DomainError("jump_lst", f"unknown jump specification {type(jump).__name__}")
    return _as_output(np.asarray(values), x)


def _pareto_lst(jump: ParetoJump, arguments: np.ndarray) -> np.ndarray:
    abs_tol = get_settings().lst_abs_tol
    flat = arguments.ravel()
    is_complex = np.iscomplexobj(flat)
    out = np.empty(flat.shape, dtype=complex if is_complex else float)
    for k, value in enumerate(flat):
        result = _pareto_lst_scalar(jump.C, jump.gamma, float(np.real(value)), float(np.imag(value)), abs_tol)
        out[k] = result if is_complex else result.real
    return out.reshape(arguments.shape)


@cached(cache=LRUCache(maxsize=65536))
def _pareto_lst_scalar(C: float, gamma: float, re: float, im: float, abs_tol: float) -> complex:
    if re == 0.0 and im == 0.0:
        return 1.0 + 0.0j

    sigma = C ** (1.0 / gamma)
    a = re * sigma
    w = im * sigma

    # b = sigma * y turns the Lomax density into gamma * (1 + y)^(-gamma - 1)
    def damped_density(y):
        return gamma * (1.0 + y) ** (-gamma - 1.0) * np.exp(-a * y)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if abs(w) < _OSCILLATION_THRESHOLD:
            real, err_re = quad(lambda y: damped_density(y) * np.cos(w * y), 0, np.inf,
                                epsabs=abs_tol, epsrel=1e-12, limit=500)
            if w == 0.0:
                imag, err_im = 0.0, 0.0
            else:
                imag, err_im = quad(lambda y: -damped_density(y) * np.sin(w * y), 0, np.inf,
                                    epsabs=abs_tol, epsrel=1e-12, limit=500)
        else:
            real, err_re = quad(damped_density, 0, np.inf, weight="cos", wvar=w,
                                epsabs=abs_tol, limlst=200)
            sine, err_im = quad(damped_density, 0, np.inf, weight="sin", wvar=w,
                                epsabs=abs_tol, limlst=200)
            imag = -sine

    if not (np.isfinite(real) and np.isfinite(imag)) or max(err_re, err_im) > _QUADRATURE_ERROR_CEILING:
        raise QuadratureError(
            f"Pareto LST (C={C}, gamma={gamma}) at x={re}{im:+}j",
            f"error estimate {max(err_re, err_im):.2e}",
        )
    return complex(real, imag)


# ============================================================================
# BRANCHING AND STABILITY
# ============================================================================

def spectral_radius(matrix, tol: Optional[float] = None, max_iter: Optional[int] = None, seed: int = 0) -> float:
    """
    Perron root of a non-negative matrix by power iteration

    Falls back to a dense eigenvalue solve when the iteration does not settle
    (periodic or nearly degenerate spectra).
    """
    settings = get_settings()
    tol = tol or settings.power_iteration_tol
    max_iter = max_iter or settings.power_iteration_max_iter

    A = np.asarray(matrix, dtype=float)
    if not A.any():
        return 0.0

    rng = np.random.default_rng(seed)
    x = rng.uniform(0.5, 1.5, size=A.shape[0])
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(max_iter):
        y = A @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        if abs(norm - estimate) <= tol * norm:
            return float(norm)
        estimate = norm
        x = y / norm

    logger.debug(f"Power iteration did not settle after {max_iter} steps, using eigenvalue fallback")
    return float(np.max(np.abs(np.linalg.eigvals(A))))


@cached(cache=LRUCache(maxsize=256))
def branching_matrix(model: HawkesModel) -> BranchingMatrix:
    entries = model.mean_jumps() * model.kernel_norms()
    entries.setflags(write=False)
    return BranchingMatrix(entries=entries, spectral_radius=spectral_radius(entries))


def is_stable(model: HawkesModel) -> bool:
    return branching_matrix(model).stable


def bivariate_stability_condition(entries) -> bool:
    """
    Closed-form stability test for d = 2

    (1 - h11)(1 - h22) > h12 h21 together with h11, h22 < 1 is equivalent to a
    Perron root below one for a non-negative 2x2 matrix.
    """
    h = np.asarray(entries, dtype=float)
    if h.shape != (2, 2):
        raise DomainError("bivariate_stability_condition", "needs a 2x2 matrix")
    return bool(h[0, 0] < 1 and h[1, 1] < 1 and (1 - h[0, 0]) * (1 - h[1, 1]) > h[0, 1] * h[1, 0])


def stationary_intensity(model: HawkesModel) -> np.ndarray:
    """Solve (I - ||H||) lambda = lambda_inf"""
    branching = require_stable(model, "stationary_intensity")
    return np.linalg.solve(np.eye(model.d) - branching.entries, model.base_rates)
