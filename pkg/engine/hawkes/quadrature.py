"""
Uniform grids, trapezoid rules and causal Volterra stepping shared by the transform and renewal solvers
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.signal import fftconvolve

from .exceptions import DomainError, RefinementNeededError

MAX_STEP_CONDITION = 1e8


@dataclass(frozen=True)
class Grid:
    """u_k = k t / n for k = 0..n"""
    t: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.t) and self.t > 0):
            raise DomainError("Grid", f"horizon must be positive (got {self.t})")
        if self.n < 2:
            raise DomainError("Grid", f"step count must be at least 2 (got {self.n})")

    @property
    def h(self) -> float:
        return self.t / self.n

    @cached_property
    def u(self) -> np.ndarray:
        nodes = np.linspace(0.0, self.t, self.n + 1)
        nodes.setflags(write=False)
        return nodes

    def refined(self) -> "Grid":
        return Grid(self.t, 2 * self.n)

    def integrate(self, values, axis: int = 0):
        """Trapezoid rule over [0, t]"""
        return trapezoid(values, dx=self.h, axis=axis)

    def cumulative(self, values, axis: int = 0) -> np.ndarray:
        return cumulative_trapezoid(values, dx=self.h, axis=axis, initial=0)

    def integral_to(self, values, x: float):
        """Exact integral over [0, x] of the piecewise-linear interpolant of grid values"""
        if not 0 <= x <= self.t * (1 + 1e-12):
            raise DomainError("Grid.integral_to", f"{x} outside [0, {self.t}]")
        values = np.asarray(values)
        k = min(int(np.floor(x / self.h)), self.n - 1)
        frac = min(x - k * self.h, self.h)
        cumulative = self.cumulative(values)
        at_x = values[k] + (values[k + 1] - values[k]) * (frac / self.h)
        return cumulative[k] + 0.5 * frac * (values[k] + at_x)


def trapezoid_convolution(kernel, signal, h: float) -> np.ndarray:
    """
    Product-trapezoid approximation of (kernel * signal)(u_k) = int_0^{u_k} kernel(v) signal(u_k - v) dv

    Both inputs are sampled on the same uniform grid along axis 0; trailing axes
    broadcast. The value at k = 0 is an empty integral.
    """
    kernel, signal = np.broadcast_arrays(np.asarray(kernel), np.asarray(signal))
    n1 = kernel.shape[0]
    full = fftconvolve(kernel, signal, axes=0)[:n1]
    out = h * (full - 0.5 * kernel[0] * signal - 0.5 * kernel * signal[0])
    out[0] = 0
    return out


def solve_volterra(forcing, weights, h: float) -> np.ndarray:
    """
    March a matrix Volterra system of the second kind

        R(u) = F(u) + int_0^u R(u - v) W(v) dv

    with the product trapezoid rule. forcing has shape (n+1, a, b), weights has
    shape (n+1, b, b); the unknown at step k depends on earlier steps and on
    itself through the half-weight diagonal term, solved as a b x b system.
    """
    forcing = np.asarray(forcing, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n1, _, b = forcing.shape

    system = np.eye(b) - 0.5 * h * weights[0]
    condition = np.linalg.cond(system)
    if not np.isfinite(condition) or condition > MAX_STEP_CONDITION:
        raise RefinementNeededError(condition, n1 - 1)
    inverse = np.linalg.inv(system)

    R = np.empty_like(forcing)
    R[0] = forcing[0]
    for k in range(1, n1):
        rhs = forcing[k] + 0.5 * h * (R[0] @ weights[k])
        if k > 1:
            rhs = rhs + h * np.einsum("lam,lmb->ab", R[k - 1:0:-1], weights[1:k])
        R[k] = rhs @ inverse
    return R
