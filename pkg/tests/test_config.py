import pytest

from app.config.analysis_config import AnalysisConfig
from app.exceptions import ConfigurationException, ValidationException
from app.models.error_models import ERROR_CODE_EXIT_MAP, ErrorCode
from app.models.monoid_models import SearchBudget
from app.utils.error_handler import ErrorHandler


def test_environment_overrides_defaults(monkeypatch):
    monkeypatch.setenv("TYPESEMI_BUDGET_N", "3")
    monkeypatch.setenv("TYPESEMI_INCLUDE_TIMING", "yes")
    config = AnalysisConfig()
    assert config.budget_n == 3
    assert config.include_timing
    assert config.describe()["closure_cap"] == 4096


@pytest.mark.parametrize("value", ["many", "0"])
def test_bad_integer_setting(monkeypatch, value):
    monkeypatch.setenv("TYPESEMI_CYCLE_CAP", value)
    with pytest.raises(ConfigurationException) as info:
        AnalysisConfig()
    assert info.value.error_code == ErrorCode.CONFIGURATION_ERROR


def test_budget_defaults_come_from_config():
    budget = SearchBudget.from_config()
    assert budget.n_max >= 1


def test_error_response_carries_exit_code_and_details():
    exc = ValidationException(message="bad x", field="x", value=3, constraint=">= 4")
    response = ErrorHandler.handle_custom_exception(exc, command="monoid leq")
    assert response.exit_code == ERROR_CODE_EXIT_MAP[exc.error_code] == 1
    assert response.details[0].field == "x"
    assert response.metadata.command == "monoid leq"
