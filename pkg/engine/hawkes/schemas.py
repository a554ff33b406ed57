from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .enums import JumpType, KernelType, MarkCoupling, MomentSource, Process, Sampler, SojournType

MODEL_SCHEMA_VERSION = "hawkes-model/1"


class SpecBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# Kernel Schemas
class ExponentialKernel(SpecBase):
    type: Literal["exponential"] = "exponential"
    alpha: float

    @property
    def kind(self) -> KernelType:
        return KernelType.EXPONENTIAL

    def violations(self) -> List[str]:
        return [] if self.alpha > 0 else [f"alpha must be positive (got {self.alpha})"]

    def value(self, t):
        return np.exp(-self.alpha * np.asarray(t, dtype=float))

    def integral(self, u):
        return -np.expm1(-self.alpha * np.asarray(u, dtype=float)) / self.alpha

    def inverse_integral(self, y):
        return -np.log1p(-self.alpha * np.asarray(y, dtype=float)) / self.alpha

    def l1_norm(self) -> float:
        return 1.0 / self.alpha


class PowerLawKernel(SpecBase):
    type: Literal["power_law"] = "power_law"
    c: float
    p: float

    @property
    def kind(self) -> KernelType:
        return KernelType.POWER_LAW

    def violations(self) -> List[str]:
        problems = []
        if not self.c > 0:
            problems.append(f"c must be positive (got {self.c})")
        if not self.p > 1:
            problems.append(f"p must exceed 1 (got {self.p})")
        return problems

    def value(self, t):
        return (self.c + np.asarray(t, dtype=float)) ** (-self.p)

    def integral(self, u):
        u = np.asarray(u, dtype=float)
        return (self.c ** (1 - self.p) - (self.c + u) ** (1 - self.p)) / (self.p - 1)

    def inverse_integral(self, y):
        y = np.asarray(y, dtype=float)
        return (self.c ** (1 - self.p) - (self.p - 1) * y) ** (1 / (1 - self.p)) - self.c

    def l1_norm(self) -> float:
        return self.c ** (1 - self.p) / (self.p - 1)


class ZeroKernel(SpecBase):
    type: Literal["zero"] = "zero"

    @property
    def kind(self) -> KernelType:
        return KernelType.ZERO

    def violations(self) -> List[str]:
        return []

    def value(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def integral(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def inverse_integral(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def l1_norm(self) -> float:
        return 0.0


KernelSpec = Annotated[Union[ExponentialKernel, PowerLawKernel, ZeroKernel], Field(discriminator="type")]


# Jump Schemas
class ZeroJump(SpecBase):
    type: Literal["zero"] = "zero"

    @property
    def kind(self) -> JumpType:
        return JumpType.ZERO

    @property
    def is_zero(self) -> bool:
        return True

    def violations(self) -> List[str]:
        return []

    def mean(self) -> float:
        return 0.0

    def sample(self, rng: np.random.Generator, size=None):
        return np.zeros(size) if size is not None else 0.0


class ConstantJump(SpecBase):
    type: Literal["constant"] = "constant"
    b: float

    @property
    def kind(self) -> JumpType:
        return JumpType.CONSTANT

    @property
    def is_zero(self) -> bool:
        return self.b == 0

    def violations(self) -> List[str]:
        return [] if self.b >= 0 else [f"jump size must be non-negative (got {self.b})"]

    def mean(self) -> float:
        return self.b

    def sample(self, rng: np.random.Generator, size=None):
        return np.full(size, self.b) if size is not None else self.b


class ExponentialJump(SpecBase):
    type: Literal["exponential"] = "exponential"
    mean_size: float = Field(alias="mean")

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    @property
    def kind(self) -> JumpType:
        return JumpType.EXPONENTIAL

    @property
    def is_zero(self) -> bool:
        return False

    def violations(self) -> List[str]:
        return [] if self.mean_size > 0 else [f"jump mean must be positive (got {self.mean_size})"]

    def mean(self) -> float:
        return self.mean_size

    def sample(self, rng: np.random.Generator, size=None):
        return rng.exponential(self.mean_size, size)


class ParetoJump(SpecBase):
    """Lomax (Pareto II) sizes with P(B > x) = (1 + x/sigma)^(-gamma), sigma = C^(1/gamma)"""
    type: Literal["pareto"] = "pareto"
    C: float
    gamma: float

    @property
    def kind(self) -> JumpType:
        return JumpType.PARETO

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def sigma(self) -> float:
        return self.C ** (1.0 / self.gamma)

    def violations(self) -> List[str]:
        problems = []
        if not self.C > 0:
            problems.append(f"tail constant C must be positive (got {self.C})")
        if not self.gamma > 1:
            problems.append(f"tail index gamma must exceed 1 (got {self.gamma})")
        return problems

    def mean(self) -> float:
        return self.sigma / (self.gamma - 1)

    def survival(self, x):
        return (1 + np.asarray(x, dtype=float) / self.sigma) ** (-self.gamma)

    def density(self, x):
        return self.gamma / self.sigma * (1 + np.asarray(x, dtype=float) / self.sigma) ** (-self.gamma - 1)

    def sample(self, rng: np.random.Generator, size=None):
        # numpy's pareto draws the unit-scale Lomax law
        return self.sigma * rng.pareto(self.gamma, size)


JumpSpec = Annotated[Union[ZeroJump, ConstantJump, ExponentialJump, ParetoJump], Field(discriminator="type")]


# Sojourn Schemas
class InfiniteSojourn(SpecBase):
    type: Literal["infinite"] = "infinite"

    @property
    def kind(self) -> SojournType:
        return SojournType.INFINITE

    def violations(self) -> List[str]:
        return []

    def survival(self, u):
        return np.ones_like(np.asarray(u, dtype=float))

    def sample(self, rng: np.random.Generator, size=None):
        return np.full(size, np.inf) if size is not None else np.inf


class ExponentialSojourn(SpecBase):
    type: Literal["exponential"] = "exponential"
    mu: float

    @property
    def kind(self) -> SojournType:
        return SojournType.EXPONENTIAL

    def violations(self) -> List[str]:
        return [] if self.mu > 0 else [f"sojourn rate mu must be positive (got {self.mu})"]

    def survival(self, u):
        return np.exp(-self.mu * np.asarray(u, dtype=float))

    def sample(self, rng: np.random.Generator, size=None):
        return rng.exponential(1.0 / self.mu, size)


class DeterministicSojourn(SpecBase):
    type: Literal["deterministic"] = "deterministic"
    tau: float

    @property
    def kind(self) -> SojournType:
        return SojournType.DETERMINISTIC

    def violations(self) -> List[str]:
        return [] if self.tau >= 0 else [f"sojourn duration tau must be non-negative (got {self.tau})"]

    def survival(self, u):
        # departure happens at u = tau
        return (np.asarray(u, dtype=float) < self.tau).astype(float)

    def sample(self, rng: np.random.Generator, size=None):
        return np.full(size, self.tau) if size is not None else self.tau


SojournSpec = Annotated[Union[InfiniteSojourn, ExponentialSojourn, DeterministicSojourn], Field(discriminator="type")]


# Model Schemas
class HawkesModel(SpecBase):
    """Declarative parameterization; entry (i, j) of kernels/jumps is the impact of source j on target i"""
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    schema_version: str = Field(MODEL_SCHEMA_VERSION, alias="schema")
    name: str = ""
    d: int = Field(alias="dimension", ge=1)
    lambda_inf: Tuple[float, ...] = Field(alias="base_rates")
    kernels: Tuple[Tuple[KernelSpec, ...], ...]
    jumps: Tuple[Tuple[JumpSpec, ...], ...]
    sojourns: Tuple[SojournSpec, ...]

    @model_validator(mode="after")
    def check_shapes(self):
        d = self.d
        if self.schema_version != MODEL_SCHEMA_VERSION:
            raise ValueError(f"unsupported schema '{self.schema_version}', expected '{MODEL_SCHEMA_VERSION}'")
        if len(self.lambda_inf) != d:
            raise ValueError(f"base_rates must have {d} entries")
        if len(self.sojourns) != d:
            raise ValueError(f"sojourns must have {d} entries")
        for label, matrix in (("kernels", self.kernels), ("jumps", self.jumps)):
            if len(matrix) != d or any(len(row) != d for row in matrix):
                raise ValueError(f"{label} must be a {d}x{d} matrix")
        return self

    @property
    def base_rates(self) -> np.ndarray:
        return np.asarray(self.lambda_inf, dtype=float)

    def kernel(self, i: int, j: int):
        return self.kernels[i][j]

    def jump(self, i: int, j: int):
        return self.jumps[i][j]

    def mean_jumps(self) -> np.ndarray:
        return np.array([[self.jumps[i][j].mean() for j in range(self.d)] for i in range(self.d)])

    def kernel_norms(self) -> np.ndarray:
        return np.array([[self.kernels[i][j].l1_norm() for j in range(self.d)] for i in range(self.d)])

    def edges(self) -> List[Tuple[int, int]]:
        """(target, source) pairs with a jump that is not identically zero"""
        return [(i, j) for i in range(self.d) for j in range(self.d) if not self.jumps[i][j].is_zero]

    def with_infinite_sojourns(self) -> "HawkesModel":
        return self.model_copy(update={"sojourns": tuple(InfiniteSojourn() for _ in range(self.d))})

    def with_base_rates(self, rates) -> "HawkesModel":
        return self.model_copy(update={"lambda_inf": tuple(float(r) for r in rates)})


class ValidationReport(BaseModel):
    violations: List[str] = []
    spectral_radius: Optional[float] = None

    @property
    def is_valid(self) -> bool:
        return not self.violations

    @property
    def stable(self) -> Optional[bool]:
        if self.spectral_radius is None:
            return None
        return self.spectral_radius < 1

    def summary(self) -> str:
        if not self.is_valid:
            return "invalid: " + "; ".join(self.violations)
        state = "stable" if self.stable else "unstable"
        return f"{state}, ρ≈{self.spectral_radius:.3f}"


# Run Schemas
class RunConfig(BaseModel):
    """Options of one CLI run; None falls back to the engine Settings default"""
    model_config = ConfigDict(extra="forbid")

    subcommand: str
    model: Path
    out: Optional[Path] = None
    seed: Optional[int] = Field(None, ge=0, description="default: Settings.seed")
    grid_steps: Optional[int] = Field(None, ge=2, description="default: Settings.grid_steps (512)")
    tol: Optional[float] = Field(None, gt=0, description="default: Settings.fixed_point_tol (1e-10)")
    max_iter: Optional[int] = Field(None, ge=1, description="default: Settings.fixed_point_max_iter (200)")
    runs: Optional[int] = Field(None, ge=2, description="default: Settings.mc_runs")
    threads: Optional[int] = Field(None, ge=0, description="default: Settings.threads")
    mark_coupling: Optional[MarkCoupling] = None

    # simulate
    horizon: Optional[float] = Field(None, gt=0)
    method: Sampler = Sampler.THINNING

    # transform / pmf / tails
    t: Optional[float] = Field(None, ge=0)
    s: Optional[List[float]] = None
    z: Optional[List[str]] = None
    y: Optional[List[str]] = None
    tau: Optional[float] = Field(None, gt=0)
    component: Optional[int] = Field(None, ge=1)
    max_k: Optional[int] = Field(None, ge=0)

    # moments
    t_grid: Optional[List[float]] = None
    statistics: Optional[List[str]] = None
    source: MomentSource = MomentSource.TRANSFORM
    stencil: Optional[float] = Field(None, gt=0, description="default: Settings.stencil_step (1e-4)")

    # tails
    thresholds: Optional[List[float]] = None
    process: Process = Process.N
    components: Optional[List[int]] = None
    monte_carlo: bool = True
