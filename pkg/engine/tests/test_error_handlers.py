import json

import pytest
from pydantic import ValidationError

from hawkes.error_handlers import ErrorReport, handle_exception
from hawkes.exceptions import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OUT_OF_SCOPE,
    EXIT_UNEXPECTED,
    EventCapExceededError,
    ModelValidationError,
    NonConvergenceError,
    NotIrreducibleError,
    RefinementNeededError,
    UnstableModelError,
)
from hawkes.schemas import HawkesModel


@pytest.mark.unit
class TestExitCodes:
    @pytest.mark.parametrize("exc,code", [
        (ModelValidationError(["alpha must be positive"]), EXIT_CONFIG),
        (UnstableModelError(1.2, "fixed_point"), EXIT_CONFIG),
        (NonConvergenceError(200, 1e-6, 1e-10), EXIT_NUMERIC),
        (RefinementNeededError(1e9, 64), EXIT_NUMERIC),
        (EventCapExceededError(100, "thinning"), EXIT_NUMERIC),
        (NotIrreducibleError(2), EXIT_OUT_OF_SCOPE),
    ])
    def test_engine_errors(self, exc, code):
        report = handle_exception(exc)
        assert report.exit_code == code
        assert report.error_code == type(exc).__name__

    def test_violations_become_detail(self):
        report = handle_exception(ModelValidationError(["a", "b"]))
        assert report.detail == "a; b"

    def test_residual_trace_in_detail(self):
        report = handle_exception(NonConvergenceError(3, 1e-3, 1e-10, [1e-1, 1e-2, 1e-3]))
        assert report.detail == "last residuals: 1.000e-01, 1.000e-02, 1.000e-03"

    def test_pydantic_validation_error(self):
        with pytest.raises(ValidationError) as info:
            HawkesModel.model_validate({"dimension": 1})
        report = handle_exception(info.value)
        assert report.exit_code == EXIT_CONFIG
        assert "base_rates" in report.detail

    def test_malformed_json(self):
        with pytest.raises(json.JSONDecodeError) as info:
            json.loads("{")
        assert handle_exception(info.value).error_code == "JSONDecodeError"

    def test_missing_file(self):
        report = handle_exception(FileNotFoundError("model.json"))
        assert report.exit_code == EXIT_CONFIG
        assert report.error_code == "FileNotFoundError"

    def test_unexpected_error(self):
        report = handle_exception(ZeroDivisionError("division by zero"))
        assert report.exit_code == EXIT_UNEXPECTED
        assert report.error_code == "InternalError"


@pytest.mark.unit
def test_report_json_omits_empty_detail():
    payload = json.loads(ErrorReport(exit_code=2, message="bad", error_code="DomainError").to_json())
    assert payload == {"error": True, "exit_code": 2, "message": "bad", "error_code": "DomainError"}
