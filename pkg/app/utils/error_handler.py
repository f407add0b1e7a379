import traceback
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.exceptions import BaseAnalysisException
from app.models.error_models import (
    ERROR_CODE_EXIT_MAP,
    ERROR_CODE_SEVERITY_MAP,
    ErrorCode,
    ErrorDetail,
    ErrorMetadata,
    ErrorSeverity,
    StandardErrorResponse,
)
from app.utils.envManager import get_env_bool


class ErrorHandler:
    """Centralized construction of error responses for the command line"""

    @staticmethod
    def create_error_metadata(
        command: Optional[str] = None,
        input_path: Optional[str] = None,
        execution_time: Optional[float] = None,
        include_stack_trace: bool = False,
        additional_context: Optional[Dict[str, Any]] = None,
    ) -> ErrorMetadata:
        """Create error metadata from the failing command and its context"""

        metadata = ErrorMetadata(
            timestamp=datetime.now(timezone.utc),
            command=command,
            input_path=input_path,
            execution_time_seconds=execution_time,
            additional_context=additional_context or None,
        )

        if include_stack_trace and get_env_bool("TYPESEMI_DEBUG", False):
            metadata.stack_trace = traceback.format_exc()

        return metadata

    @staticmethod
    def create_standard_error_response(
        error_code: ErrorCode,
        message: str,
        details: Optional[List[ErrorDetail]] = None,
        severity: Optional[ErrorSeverity] = None,
        command: Optional[str] = None,
        input_path: Optional[str] = None,
        execution_time: Optional[float] = None,
        additional_context: Optional[Dict[str, Any]] = None,
    ) -> StandardErrorResponse:
        """Create a standardized error response"""

        metadata = ErrorHandler.create_error_metadata(
            command=command,
            input_path=input_path,
            execution_time=execution_time,
            include_stack_trace=True,
            additional_context=additional_context,
        )

        return StandardErrorResponse(
            error_code=error_code,
            error_type=ErrorHandler._get_error_type_from_code(error_code),
            message=message,
            details=details or None,
            severity=severity or ERROR_CODE_SEVERITY_MAP.get(error_code, ErrorSeverity.MEDIUM),
            exit_code=ERROR_CODE_EXIT_MAP.get(error_code, 1),
            metadata=metadata,
        )

    @staticmethod
    def handle_custom_exception(
        exception: BaseAnalysisException,
        command: Optional[str] = None,
        input_path: Optional[str] = None,
        execution_time: Optional[float] = None,
    ) -> StandardErrorResponse:
        """Handle typesemi exceptions"""

        additional_context = exception.context.copy() if exception.context else {}
        additional_context["exception_type"] = type(exception).__name__

        return ErrorHandler.create_standard_error_response(
            error_code=exception.error_code,
            message=exception.message,
            details=exception.details,
            severity=exception.severity,
            command=command,
            input_path=input_path,
            execution_time=execution_time,
            additional_context=additional_context,
        )

    @staticmethod
    def handle_validation_exception(
        exception: ValidationError,
        command: Optional[str] = None,
        input_path: Optional[str] = None,
    ) -> StandardErrorResponse:
        """Handle pydantic validation errors that escaped the parsers, e.g. in a report file"""

        details = []
        for error in exception.errors():
            field_path = ".".join(str(loc) for loc in error.get("loc", []))
            details.append(
                ErrorDetail(
                    field=field_path or None,
                    constraint=error.get("type"),
                    suggestion=error.get("msg", ""),
                )
            )

        return ErrorHandler.create_standard_error_response(
            error_code=ErrorCode.INVALID_INPUT,
            message=f"Validation failed with {len(details)} error(s)",
            details=details,
            command=command,
            input_path=input_path,
        )

    @staticmethod
    def handle_unexpected_exception(
        exception: Exception,
        command: Optional[str] = None,
        input_path: Optional[str] = None,
        execution_time: Optional[float] = None,
        user_message: str = "An unexpected error occurred",
    ) -> StandardErrorResponse:
        """Handle unexpected exceptions"""

        additional_context = {
            "exception_type": type(exception).__name__,
            "exception_message": str(exception),
        }

        return ErrorHandler.create_standard_error_response(
            error_code=ErrorCode.INTERNAL_ERROR,
            message=user_message,
            severity=ErrorSeverity.HIGH,
            command=command,
            input_path=input_path,
            execution_time=execution_time,
            additional_context=additional_context,
        )

    @staticmethod
    def _get_error_type_from_code(error_code: ErrorCode) -> str:
        """Get human-readable error type from error code"""

        error_type_map = {
            ErrorCode.INVALID_INPUT: "Validation Error",
            ErrorCode.UNDECLARED_GENERATOR: "Validation Error",
            ErrorCode.ZERO_ELEMENT: "Validation Error",
            ErrorCode.INVALID_TABLE: "Validation Error",
            ErrorCode.INVALID_ACTION: "Validation Error",
            ErrorCode.INVALID_SPACE: "Validation Error",
            ErrorCode.PARSE_ERROR: "Parse Error",
            ErrorCode.PREMISE_VIOLATED: "Precondition Error",
            ErrorCode.SEPARATION_FAILED: "Precondition Error",
            ErrorCode.SOURCES_PRESENT: "Precondition Error",
            ErrorCode.NOT_INVARIANT: "Precondition Error",
            ErrorCode.PARADOX_DETECTED: "Precondition Error",
            ErrorCode.CLOSURE_CAP_EXCEEDED: "Budget Error",
            ErrorCode.CYCLE_CAP_EXCEEDED: "Budget Error",
            ErrorCode.SEARCH_CAP_EXCEEDED: "Budget Error",
            ErrorCode.INVALID_BUDGET: "Budget Error",
            ErrorCode.UNKNOWN_SUBCOMMAND: "Usage Error",
            ErrorCode.CONFIGURATION_ERROR: "Configuration Error",
            ErrorCode.INTERNAL_ERROR: "Internal Error",
        }

        return error_type_map.get(error_code, "Unknown Error")
