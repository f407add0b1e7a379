from enum import Enum
from typing import Dict, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from app.models.graph_models import Graph, LayeredGraph, SelfSimilarAction
from app.models.groupoid_models import GroupoidModel
from app.models.lattice_models import FiniteSpace
from app.models.monoid_models import FiniteMonoid, MonoidPresentation


class InputKind(str, Enum):
    MONOID = "monoid"
    FINITE_MONOID = "finite-monoid"
    SPACE = "space"
    GROUPOID = "groupoid"
    GRAPH = "graph"
    LAYERED = "layered"


Subject = Union[MonoidPresentation, FiniteMonoid, FiniteSpace, GroupoidModel, Graph, LayeredGraph]


class SectionLine(BaseModel):
    model_config = ConfigDict(frozen=True)

    line: int
    text: str


class ParsedInput(BaseModel):
    """A validated input file together with its digest and unused sections."""

    model_config = ConfigDict(frozen=True)

    kind: InputKind
    path: Optional[str] = None
    digest: str = Field(..., description="sha256 of the raw bytes")
    value: Subject
    action: Optional[SelfSimilarAction] = None
    extras: Dict[str, Tuple[SectionLine, ...]] = Field(
        default_factory=dict, description="Sections the kind does not consume, e.g. [ks] for spaces"
    )

    def extra_lines(self, section: str) -> Tuple[SectionLine, ...]:
        return self.extras.get(section, ())
