"""Bundled regression inputs and the verdicts expected of them."""

import json
from pathlib import Path
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field

from app.parsers.input_parser import BUILTIN_PREFIX

CORPUS_DIR = Path(__file__).resolve().parent
EXPECTED_FILE = CORPUS_DIR / "expected.json"


class CorpusCase(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    operation: str
    input: str = Field(..., description="File name inside the corpus directory, or builtin:<name>")
    args: Dict[str, str] = Field(default_factory=dict)
    expected: str = Field(..., description="Verdict the case must produce")

    def source(self) -> str:
        if self.input.startswith(BUILTIN_PREFIX):
            return self.input
        return str(CORPUS_DIR / self.input)


def load_cases() -> List[CorpusCase]:
    raw = json.loads(EXPECTED_FILE.read_text(encoding="utf-8"))
    return sorted((CorpusCase.model_validate(case) for case in raw["cases"]), key=lambda c: c.name)
