from typing import List, Optional, Sequence, Tuple

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_OUT_OF_SCOPE = 4


class HawkesEngineError(Exception):
    """Base exception for the Hawkes engine"""
    def __init__(self, message: str, exit_code: int = EXIT_CONFIG):
        self.message = message
        self.exit_code = exit_code
        super().__init__(self.message)


# Configuration and validation (exit code 2)
class ConfigurationError(HawkesEngineError):
    """Run configuration or model file error"""
    def __init__(self, message: str):
        super().__init__(message, EXIT_CONFIG)


class ModelValidationError(HawkesEngineError):
    """Model violates one or more admissibility constraints"""
    def __init__(self, violations: Sequence[str]):
        self.violations: List[str] = list(violations)
        message = "Model is not admissible: " + "; ".join(self.violations)
        super().__init__(message, EXIT_CONFIG)


class DomainError(HawkesEngineError):
    """Argument outside the domain of an operation"""
    def __init__(self, operation: str, detail: str):
        message = f"{operation}: {detail}"
        super().__init__(message, EXIT_CONFIG)


class UnstableModelError(HawkesEngineError):
    def __init__(self, spectral_radius: float, operation: str = None):
        self.spectral_radius = spectral_radius
        message = f"Model is unstable: spectral radius of the branching matrix is {spectral_radius:.6g} (must be < 1)"
        if operation:
            message += f" - required by {operation}"
        super().__init__(message, EXIT_CONFIG)


class ClaimTransformError(HawkesEngineError):
    def __init__(self, component: int, value: complex):
        message = f"Claim LST for component {component + 1} evaluated to {value}, outside (0, 1]"
        super().__init__(message, EXIT_CONFIG)


# Numerical failures (exit code 3)
class NumericalError(HawkesEngineError):
    """Numerical procedure failed"""
    def __init__(self, message: str):
        super().__init__(message, EXIT_NUMERIC)


class NonConvergenceError(NumericalError):
    def __init__(self, iterations: int, residual: float, tol: float, residual_trace: Optional[Sequence[float]] = None):
        self.iterations = iterations
        self.residual = residual
        self.tol = tol
        self.residual_trace: List[float] = list(residual_trace or [])
        message = (
            f"Fixed point did not converge after {iterations} iterations: "
            f"residual {residual:.3e} above tolerance {tol:.1e}"
        )
        super().__init__(message)


class QuadratureError(NumericalError):
    def __init__(self, what: str, detail: str):
        super().__init__(f"Quadrature failed for {what}: {detail}")


class RefinementNeededError(NumericalError):
    def __init__(self, condition_number: float, steps: int):
        self.condition_number = condition_number
        message = (
            f"Per-step Volterra system is near-singular (condition number {condition_number:.3e}) "
            f"on a {steps}-step grid; refine the grid"
        )
        super().__init__(message)


class EventCapExceededError(NumericalError):
    def __init__(self, cap: int, sampler: str):
        self.cap = cap
        message = f"{sampler} sampler exceeded the event cap of {cap} events"
        super().__init__(message)


# Out-of-scope models (exit code 4)
class OutOfScopeError(HawkesEngineError):
    """Model outside the scope of the heavy-tail analysis"""
    def __init__(self, message: str):
        super().__init__(message, EXIT_OUT_OF_SCOPE)


class UnsupportedConfigurationError(OutOfScopeError):
    def __init__(self, cells: Sequence[Tuple[int, int]], reason: str):
        self.cells = list(cells)
        listed = ", ".join(f"B{i + 1}{j + 1}" for i, j in self.cells)
        super().__init__(f"Unsupported jump configuration in cells [{listed}]: {reason}")


class TailIndexOutOfScopeError(OutOfScopeError):
    def __init__(self, component: int, gamma_bar: float):
        self.component = component
        self.gamma_bar = gamma_bar
        message = (
            f"Tail index of component {component + 1} is {gamma_bar:.6g}; "
            f"the asymptotic expansion requires a tail index in (1, 2)"
        )
        super().__init__(message)


class NotIrreducibleError(OutOfScopeError):
    def __init__(self, n_classes: int):
        message = f"Hawkes graph is not irreducible ({n_classes} classes); linear combinations need a single class"
        super().__init__(message)
