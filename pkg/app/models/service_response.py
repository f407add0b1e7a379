import json
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field

from app import __version__
from app.models.judgement_models import Judgement


class ServiceMetadata(BaseModel):
    """Metadata for service execution details"""

    budgets: Dict[str, int] = Field(default_factory=dict, description="Budgets in effect")
    execution_time_seconds: Optional[float] = Field(
        None, description="Execution time in seconds (only when timing is enabled)"
    )


class Report(BaseModel):
    """Machine-readable outcome of one CLI operation"""

    tool: str = Field("typesemi", description="Producing tool")
    version: str = Field(__version__, description="Tool version")
    operation: str = Field(..., description="Subcommand path, e.g. 'monoid leq'")
    input_path: Optional[str] = Field(None, description="Input file as given")
    input_digest: Optional[str] = Field(None, description="SHA-256 of the input bytes")
    arguments: Dict[str, str] = Field(
        default_factory=dict, description="Operation arguments in their textual form"
    )
    verdict: Optional[str] = Field(None, description="PROVED, REFUTED, UNKNOWN or a classification")
    judgement: Optional[Judgement] = Field(None, description="Verdict with its certificate")
    payload: Optional[Dict[str, Any]] = Field(
        None, description="Structured result for operations that do not return a judgement"
    )
    metadata: ServiceMetadata = Field(default_factory=ServiceMetadata)

    def to_dict(self) -> Dict[str, Any]:
        """Convert the report to a JSON-ready dictionary; exact values stay strings"""
        return self.model_dump(mode="json", exclude_none=True)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)
