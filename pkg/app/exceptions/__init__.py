from typing import Optional, Any, Dict, List
from app.models.error_models import ErrorCode, ErrorDetail, ErrorSeverity


class BaseAnalysisException(Exception):
    """Base exception class for all typesemi custom exceptions"""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode,
        details: Optional[List[ErrorDetail]] = None,
        context: Optional[Dict[str, Any]] = None,
        severity: Optional[ErrorSeverity] = None,
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or []
        self.context = context or {}
        self.severity = severity
        super().__init__(self.message)


class ValidationException(BaseAnalysisException):
    """Exception for malformed or semantically invalid input values"""

    def __init__(
        self,
        message: str = "Validation failed",
        error_code: ErrorCode = ErrorCode.INVALID_INPUT,
        field: Optional[str] = None,
        value: Optional[Any] = None,
        constraint: Optional[str] = None,
        suggestion: Optional[str] = None,
    ):
        details = []
        if field or value or constraint or suggestion:
            details.append(
                ErrorDetail(
                    field=field,
                    value=value,
                    constraint=constraint,
                    suggestion=suggestion,
                )
            )

        super().__init__(
            message=message,
            error_code=error_code,
            details=details,
            severity=ErrorSeverity.LOW,
        )


class InputParseException(BaseAnalysisException):
    """Exception for syntax errors in the line-oriented input formats"""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        source: Optional[str] = None,
    ):
        context = {}
        if source:
            context["source"] = source
        super().__init__(
            message=message,
            error_code=ErrorCode.PARSE_ERROR,
            details=[ErrorDetail(line=line, column=column, constraint=message)],
            context=context,
            severity=ErrorSeverity.LOW,
        )
        self.line = line
        self.column = column


class PreconditionException(BaseAnalysisException):
    """Exception for operations whose mathematical precondition fails"""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode = ErrorCode.PREMISE_VIOLATED,
        witness: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(
            message=message,
            error_code=error_code,
            context=witness or {},
            severity=ErrorSeverity.LOW
            if error_code != ErrorCode.SEPARATION_FAILED
            else ErrorSeverity.MEDIUM,
        )


class BudgetExceededException(BaseAnalysisException):
    """Exception for hard caps on enumerations and exhaustive searches (judgement searches yield UNKNOWN instead)"""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode,
        cap: Optional[int] = None,
        reached: Optional[int] = None,
    ):
        context = {}
        if cap is not None:
            context["cap"] = cap
        if reached is not None:
            context["reached"] = reached
        super().__init__(
            message=message,
            error_code=error_code,
            context=context,
            severity=ErrorSeverity.MEDIUM,
        )


class ConfigurationException(BaseAnalysisException):
    """Exception for configuration and environment related errors"""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode = ErrorCode.CONFIGURATION_ERROR,
        config_key: Optional[str] = None,
        expected_type: Optional[str] = None,
    ):
        context = {}
        if config_key:
            context["config_key"] = config_key
        if expected_type:
            context["expected_type"] = expected_type

        super().__init__(
            message=message,
            error_code=error_code,
            context=context,
            severity=ErrorSeverity.CRITICAL,
        )


def undeclared_generator(name: str, generators: List[str]) -> ValidationException:
    """Create an undeclared generator exception"""
    return ValidationException(
        message=f"Generator '{name}' is not declared",
        error_code=ErrorCode.UNDECLARED_GENERATOR,
        field="generators",
        value=name,
        constraint=f"must be one of {', '.join(generators) or '(none)'}",
    )


def zero_element(operation: str) -> ValidationException:
    """Create an exception for a forbidden zero argument"""
    return ValidationException(
        message=f"{operation} requires a nonzero element",
        error_code=ErrorCode.ZERO_ELEMENT,
        field="element",
        value="0",
        constraint="element != 0",
    )


def premise_violated(
    operation: str, constraint: str, witness: Optional[Dict[str, Any]] = None
) -> PreconditionException:
    """Create a premise violation exception with the violating witness"""
    return PreconditionException(
        message=f"{operation}: premise violated ({constraint})",
        error_code=ErrorCode.PREMISE_VIOLATED,
        witness=witness,
    )


def separation_failed(witness: Dict[str, Any]) -> PreconditionException:
    """Create an exception for strata that the finite topology cannot separate"""
    return PreconditionException(
        message="finite space cannot separate the strata by opens with disjoint closures",
        error_code=ErrorCode.SEPARATION_FAILED,
        witness=witness,
    )


def sources_present(sources: List[str]) -> PreconditionException:
    """Create an exception for graphs that have sources"""
    return PreconditionException(
        message=f"graph has sources (vertices receiving no edge): {', '.join(sources)}",
        error_code=ErrorCode.SOURCES_PRESENT,
        witness={"sources": sources},
    )


def closure_cap_exceeded(cap: int, reached: int) -> BudgetExceededException:
    """Create an exception for an inverse-semigroup closure that grew past its cap"""
    return BudgetExceededException(
        message=f"inverse semigroup closure exceeded cap {cap}",
        error_code=ErrorCode.CLOSURE_CAP_EXCEEDED,
        cap=cap,
        reached=reached,
    )


def cycle_cap_exceeded(cap: int) -> BudgetExceededException:
    """Create an exception for too many simple cycles"""
    return BudgetExceededException(
        message=f"simple cycle enumeration exceeded cap {cap}",
        error_code=ErrorCode.CYCLE_CAP_EXCEEDED,
        cap=cap,
    )


def search_cap_exceeded(operation: str, cap: int) -> BudgetExceededException:
    """Create an exception for an exhaustive search stopped before it decided"""
    return BudgetExceededException(
        message=f"{operation}: search stopped after {cap} states without a decision",
        error_code=ErrorCode.SEARCH_CAP_EXCEEDED,
        cap=cap,
    )


def invalid_budget(field: str, value: Any) -> ValidationException:
    """Create an exception for a nonsensical budget value"""
    return ValidationException(
        message=f"Budget field '{field}' must be a positive integer",
        error_code=ErrorCode.INVALID_BUDGET,
        field=field,
        value=value,
        constraint="> 0",
    )


def parse_error(
    message: str, line: Optional[int] = None, column: Optional[int] = None
) -> InputParseException:
    """Create a parse error located at a line and column"""
    where = f" at line {line}" if line is not None else ""
    if line is not None and column is not None:
        where += f", column {column}"
    return InputParseException(message=f"{message}{where}", line=line, column=column)
