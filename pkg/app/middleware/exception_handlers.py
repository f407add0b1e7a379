"""
Translation of exceptions raised under a CLI command into a logged,
structured error response and a process exit status.
"""

import time
import traceback
from contextlib import contextmanager
from typing import Iterator, Optional

import logfire
from pydantic import ValidationError

from app.exceptions import BaseAnalysisException
from app.models.error_models import ERROR_CODE_SEVERITY_MAP, ErrorSeverity, StandardErrorResponse
from app.utils.error_handler import ErrorHandler


class CommandFailed(Exception):
    """Carries the error response of a failed command out of ``guard``."""

    def __init__(self, response: StandardErrorResponse):
        self.response = response
        super().__init__(response.message)


def analysis_exception_handler(
    exc: BaseAnalysisException,
    command: Optional[str],
    input_path: Optional[str],
    start_time: float,
) -> StandardErrorResponse:
    """Handle all typesemi exceptions."""
    severity = exc.severity or ERROR_CODE_SEVERITY_MAP.get(exc.error_code, ErrorSeverity.MEDIUM)
    response = ErrorHandler.handle_custom_exception(
        exc, command=command, input_path=input_path, execution_time=time.time() - start_time
    )

    log_data = {
        "error_code": exc.error_code.value,
        "message": exc.message,
        "exit_code": response.exit_code,
        "command": command,
        "input_path": input_path,
        "context": exc.context,
    }

    if severity in [ErrorSeverity.HIGH, ErrorSeverity.CRITICAL]:
        logfire.error("typesemi exception", **log_data)
    elif severity == ErrorSeverity.MEDIUM:
        logfire.warn("typesemi exception", **log_data)
    else:
        logfire.info("typesemi exception", **log_data)

    return response


def validation_exception_handler(
    exc: ValidationError, command: Optional[str], input_path: Optional[str]
) -> StandardErrorResponse:
    """Handle pydantic validation errors."""
    response = ErrorHandler.handle_validation_exception(exc, command=command, input_path=input_path)
    logfire.info(
        "Validation Error",
        error_count=len(response.details or []),
        command=command,
        input_path=input_path,
    )
    return response


def general_exception_handler(
    exc: Exception, command: Optional[str], input_path: Optional[str], start_time: float
) -> StandardErrorResponse:
    """Handle unexpected exceptions."""
    logfire.error(
        "Unexpected Exception",
        exception_type=exc.__class__.__name__,
        message=str(exc),
        command=command,
        input_path=input_path,
        stack_trace=traceback.format_exc(),
    )
    return ErrorHandler.handle_unexpected_exception(
        exc,
        command=command,
        input_path=input_path,
        execution_time=time.time() - start_time,
        user_message=f"{command or 'command'} failed unexpectedly: {exc}",
    )


@contextmanager
def guard(command: Optional[str], input_path: Optional[str] = None) -> Iterator[None]:
    """
    Run a command body; any exception leaves as ``CommandFailed`` with the
    error response already logged.
    """
    start_time = time.time()
    try:
        yield
    except BaseAnalysisException as e:
        raise CommandFailed(analysis_exception_handler(e, command, input_path, start_time)) from e
    except ValidationError as e:
        raise CommandFailed(validation_exception_handler(e, command, input_path)) from e
    except Exception as e:
        raise CommandFailed(general_exception_handler(e, command, input_path, start_time)) from e
