"""
Operation registry shared by the click commands and ``corpus run``.

An operation turns an input source and its textual arguments into a
``Report``; the click layer only gathers options and renders the result.
"""

from typing import Any, Callable, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.config.output_config import OutputFormat
from app.exceptions import ValidationException
from app.models.error_models import ErrorCode
from app.models.input_models import ParsedInput
from app.models.judgement_models import Judgement
from app.models.monoid_models import Element, SearchBudget
from app.models.service_response import Report, ServiceMetadata
from app.parsers.input_parser import InputParser


class RunSettings(BaseModel):
    """Global flags of one invocation."""

    model_config = ConfigDict(frozen=True)

    output_format: OutputFormat = OutputFormat.HUMAN
    budget: SearchBudget = Field(default_factory=SearchBudget.from_config)
    seed: int = 0
    unknown_ok: bool = False


Arguments = Dict[str, str]
Builder = Callable[[Optional[str], Arguments, RunSettings], Report]

OPERATIONS: Dict[str, Builder] = {}


def operation(name: str) -> Callable[[Builder], Builder]:
    def register(builder: Builder) -> Builder:
        OPERATIONS[name] = builder
        return builder

    return register


def run_operation(name: str, source: Optional[str], args: Arguments, settings: RunSettings) -> Report:
    builder = OPERATIONS.get(name)
    if builder is None:
        raise ValidationException(
            message=f"unknown operation '{name}'",
            error_code=ErrorCode.UNKNOWN_SUBCOMMAND,
            field="operation",
            value=name,
            constraint=", ".join(sorted(OPERATIONS)),
        )
    return builder(source, args, settings)


def dumped(model: BaseModel) -> Dict[str, Any]:
    return model.model_dump(mode="json", exclude_none=True)


def build_report(
    name: str,
    parsed: Optional[ParsedInput],
    args: Arguments,
    settings: RunSettings,
    judgement: Optional[Judgement] = None,
    verdict: Optional[str] = None,
    payload: Optional[Dict[str, Any]] = None,
) -> Report:
    if verdict is None and judgement is not None:
        verdict = judgement.verdict.value
    return Report(
        operation=name,
        input_path=parsed.path if parsed else None,
        input_digest=parsed.digest if parsed else None,
        arguments=dict(sorted(args.items())),
        verdict=verdict,
        judgement=judgement,
        payload=payload,
        metadata=ServiceMetadata(budgets=settings.budget.model_dump()),
    )


def require(args: Arguments, name: str) -> str:
    value = args.get(name)
    if value is None or not value.strip():
        raise ValidationException(
            message=f"argument '{name}' is required",
            error_code=ErrorCode.INVALID_INPUT,
            field=name,
            constraint="required",
        )
    return value


def element_list(parsed: ParsedInput, text: Optional[str]) -> List[Element]:
    """Elements separated by ';', each in the input's own vocabulary."""
    if not text:
        return []
    return [InputParser.monoid_element(parsed, chunk) for chunk in text.split(";") if chunk.strip()]


def truth(flag: bool) -> str:
    return "TRUE" if flag else "FALSE"
