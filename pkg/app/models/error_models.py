from enum import Enum
from typing import Optional, Any, Dict, List
from pydantic import BaseModel, ConfigDict, Field
from datetime import datetime, timezone


class ErrorCode(str, Enum):
    """Enumeration of standard error codes"""

    INVALID_INPUT = "INVALID_INPUT"
    UNDECLARED_GENERATOR = "UNDECLARED_GENERATOR"
    ZERO_ELEMENT = "ZERO_ELEMENT"
    INVALID_TABLE = "INVALID_TABLE"
    INVALID_ACTION = "INVALID_ACTION"
    INVALID_SPACE = "INVALID_SPACE"
    PARSE_ERROR = "PARSE_ERROR"

    PREMISE_VIOLATED = "PREMISE_VIOLATED"
    SEPARATION_FAILED = "SEPARATION_FAILED"
    SOURCES_PRESENT = "SOURCES_PRESENT"
    NOT_INVARIANT = "NOT_INVARIANT"
    PARADOX_DETECTED = "PARADOX_DETECTED"

    CLOSURE_CAP_EXCEEDED = "CLOSURE_CAP_EXCEEDED"
    CYCLE_CAP_EXCEEDED = "CYCLE_CAP_EXCEEDED"
    SEARCH_CAP_EXCEEDED = "SEARCH_CAP_EXCEEDED"
    INVALID_BUDGET = "INVALID_BUDGET"

    INTERNAL_ERROR = "INTERNAL_ERROR"
    CONFIGURATION_ERROR = "CONFIGURATION_ERROR"
    UNKNOWN_SUBCOMMAND = "UNKNOWN_SUBCOMMAND"


class ErrorSeverity(str, Enum):
    """Error severity levels"""

    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"
    CRITICAL = "CRITICAL"


class ErrorDetail(BaseModel):
    """Detailed error information"""

    field: Optional[str] = Field(
        None, description="Input field or invariant that caused the error"
    )
    value: Optional[Any] = Field(
        None, description="Offending value, rendered as text when possible"
    )
    constraint: Optional[str] = Field(None, description="Constraint that was violated")
    suggestion: Optional[str] = Field(None, description="Suggested fix for the error")
    line: Optional[int] = Field(None, description="1-based line number in the input")
    column: Optional[int] = Field(None, description="1-based column in the input")


class ErrorMetadata(BaseModel):
    """Extended metadata for error tracking and debugging"""

    timestamp: datetime = Field(
        default_factory=lambda: datetime.now(timezone.utc),
        description="When the error occurred",
    )
    command: Optional[str] = Field(None, description="CLI command that failed")
    input_path: Optional[str] = Field(None, description="Input file, if any")
    execution_time_seconds: Optional[float] = Field(
        None, description="Time taken before error occurred"
    )
    stack_trace: Optional[str] = Field(
        None, description="Stack trace for debugging (dev only)"
    )
    additional_context: Optional[Dict[str, Any]] = Field(
        None, description="Additional context data"
    )


class StandardErrorResponse(BaseModel):
    """Standardized error payload printed by the command-line front end"""

    model_config = ConfigDict(use_enum_values=True)

    success: bool = Field(False, description="Always false for error responses")
    error_code: ErrorCode = Field(..., description="Standardized error code")
    error_type: str = Field(..., description="Human-readable error type")
    message: str = Field(..., description="User-friendly error message")
    details: Optional[List[ErrorDetail]] = Field(
        None, description="Detailed error information"
    )
    severity: ErrorSeverity = Field(
        ErrorSeverity.MEDIUM, description="Error severity level"
    )
    exit_code: int = Field(..., description="Process exit status")
    metadata: Optional[ErrorMetadata] = Field(
        None, description="Error metadata for debugging"
    )

    def to_dict(self) -> Dict[str, Any]:
        """Convert error response to dictionary format"""
        result = self.model_dump(exclude_none=True)

        if "metadata" in result and result["metadata"]:
            metadata = result["metadata"]
            if "timestamp" in metadata and metadata["timestamp"]:
                if hasattr(metadata["timestamp"], "isoformat"):
                    metadata["timestamp"] = metadata["timestamp"].isoformat()

        return result


ERROR_CODE_EXIT_MAP = {
    ErrorCode.INVALID_INPUT: 1,
    ErrorCode.UNDECLARED_GENERATOR: 1,
    ErrorCode.ZERO_ELEMENT: 1,
    ErrorCode.INVALID_TABLE: 1,
    ErrorCode.INVALID_ACTION: 1,
    ErrorCode.INVALID_SPACE: 1,
    ErrorCode.PARSE_ERROR: 1,
    ErrorCode.PREMISE_VIOLATED: 1,
    ErrorCode.SEPARATION_FAILED: 1,
    ErrorCode.SOURCES_PRESENT: 1,
    ErrorCode.NOT_INVARIANT: 1,
    ErrorCode.PARADOX_DETECTED: 1,
    ErrorCode.CLOSURE_CAP_EXCEEDED: 1,
    ErrorCode.CYCLE_CAP_EXCEEDED: 1,
    ErrorCode.SEARCH_CAP_EXCEEDED: 1,
    ErrorCode.INVALID_BUDGET: 1,
    ErrorCode.UNKNOWN_SUBCOMMAND: 1,
    ErrorCode.CONFIGURATION_ERROR: 1,
    ErrorCode.INTERNAL_ERROR: 1,
}

ERROR_CODE_SEVERITY_MAP = {
    ErrorCode.INVALID_INPUT: ErrorSeverity.LOW,
    ErrorCode.UNDECLARED_GENERATOR: ErrorSeverity.LOW,
    ErrorCode.ZERO_ELEMENT: ErrorSeverity.LOW,
    ErrorCode.INVALID_TABLE: ErrorSeverity.LOW,
    ErrorCode.INVALID_ACTION: ErrorSeverity.LOW,
    ErrorCode.INVALID_SPACE: ErrorSeverity.LOW,
    ErrorCode.PARSE_ERROR: ErrorSeverity.LOW,
    ErrorCode.PREMISE_VIOLATED: ErrorSeverity.LOW,
    ErrorCode.SEPARATION_FAILED: ErrorSeverity.MEDIUM,
    ErrorCode.SOURCES_PRESENT: ErrorSeverity.LOW,
    ErrorCode.NOT_INVARIANT: ErrorSeverity.LOW,
    ErrorCode.PARADOX_DETECTED: ErrorSeverity.MEDIUM,
    ErrorCode.CLOSURE_CAP_EXCEEDED: ErrorSeverity.MEDIUM,
    ErrorCode.CYCLE_CAP_EXCEEDED: ErrorSeverity.MEDIUM,
    ErrorCode.SEARCH_CAP_EXCEEDED: ErrorSeverity.MEDIUM,
    ErrorCode.INVALID_BUDGET: ErrorSeverity.LOW,
    ErrorCode.UNKNOWN_SUBCOMMAND: ErrorSeverity.LOW,
    ErrorCode.CONFIGURATION_ERROR: ErrorSeverity.CRITICAL,
    ErrorCode.INTERNAL_ERROR: ErrorSeverity.HIGH,
}
