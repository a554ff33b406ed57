import json
import logging
from dataclasses import dataclass, asdict
from typing import Callable, Dict, Optional, Type

from pydantic import ValidationError

from .exceptions import (
    EXIT_CONFIG,
    EXIT_UNEXPECTED,
    HawkesEngineError,
    ModelValidationError,
    NonConvergenceError,
)
from .logging_config import log_error

# Setup logger
logger = logging.getLogger(__name__)


@dataclass
class ErrorReport:
    exit_code: int
    message: str
    error_code: str
    detail: Optional[str] = None

    def to_json(self) -> str:
        content = {"error": True, **{k: v for k, v in asdict(self).items() if v is not None}}
        return json.dumps(content, sort_keys=True)


def create_error_report(
    exit_code: int,
    message: str,
    detail: str = None,
    error_code: str = None
) -> ErrorReport:
    """Create standardized error report"""
    return ErrorReport(
        exit_code=exit_code,
        message=message,
        error_code=error_code or "Error",
        detail=detail,
    )


def engine_exception_handler(exc: HawkesEngineError) -> ErrorReport:
    """Handle engine exceptions"""
    logger.warning(f"Engine exception: {exc.message}")

    detail = None
    if isinstance(exc, ModelValidationError):
        detail = "; ".join(exc.violations)
    elif isinstance(exc, NonConvergenceError) and exc.residual_trace:
        tail = ", ".join(f"{r:.3e}" for r in exc.residual_trace[-5:])
        detail = f"last residuals: {tail}"

    return create_error_report(
        exit_code=exc.exit_code,
        message=exc.message,
        detail=detail,
        error_code=exc.__class__.__name__
    )


def validation_exception_handler(exc: ValidationError) -> ErrorReport:
    """Handle pydantic validation exceptions (model files, run configs)"""
    logger.warning(f"Validation exception: {exc.error_count()} error(s)")

    detail = "; ".join(
        f"{'.'.join(str(loc) for loc in err['loc'])}: {err['msg']}" for err in exc.errors()
    )
    return create_error_report(
        exit_code=EXIT_CONFIG,
        message="Validation error",
        detail=detail,
        error_code="ValidationError"
    )


def file_exception_handler(exc: OSError) -> ErrorReport:
    """Handle unreadable inputs"""
    logger.warning(f"File exception: {str(exc)}")

    return create_error_report(
        exit_code=EXIT_CONFIG,
        message="Cannot read input file",
        detail=str(exc),
        error_code=exc.__class__.__name__
    )


def decode_exception_handler(exc: json.JSONDecodeError) -> ErrorReport:
    logger.warning(f"Decode exception: {str(exc)}")

    return create_error_report(
        exit_code=EXIT_CONFIG,
        message="Malformed JSON input",
        detail=str(exc),
        error_code="JSONDecodeError"
    )


def generic_exception_handler(exc: Exception) -> ErrorReport:
    """Handle all other exceptions"""
    log_error(exc, context="unhandled in CLI run")

    return create_error_report(
        exit_code=EXIT_UNEXPECTED,
        message="Internal error",
        detail=f"{type(exc).__name__}: {exc}",
        error_code="InternalError"
    )


# Exception handlers mapping, most specific first
EXCEPTION_HANDLERS: Dict[Type[BaseException], Callable[..., ErrorReport]] = {
    HawkesEngineError: engine_exception_handler,
    ValidationError: validation_exception_handler,
    json.JSONDecodeError: decode_exception_handler,
    OSError: file_exception_handler,
    Exception: generic_exception_handler,
}


def handle_exception(exc: Exception) -> ErrorReport:
    """Dispatch an exception to the first matching handler"""
    for exception_type, handler in EXCEPTION_HANDLERS.items():
        if isinstance(exc, exception_type):
            return handler(exc)
    return generic_exception_handler(exc)
