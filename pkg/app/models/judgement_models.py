"""
Three-valued verdicts and the certificates that back them.

Every PROVED or REFUTED judgement carries a certificate that
``VerifyService.verify`` can replay against the input it was computed from.
"""

from enum import Enum
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from app.models.monoid_models import (
    BudgetReport,
    ClassEnumeration,
    Derivation,
    Element,
    ModularInvariant,
    TableWitness,
)
from app.models.state_models import FarkasCertificate, StateVector


class Verdict(str, Enum):
    PROVED = "PROVED"
    REFUTED = "REFUTED"
    UNKNOWN = "UNKNOWN"


class ClaimKind(str, Enum):
    LEQ = "LEQ"
    IDEAL_MEMBER = "IDEAL_MEMBER"
    PARADOXICAL = "PARADOXICAL"
    PROPERLY_INFINITE = "PROPERLY_INFINITE"
    STABLY_DOMINATED = "STABLY_DOMINATED"
    ORDER_UNIT = "ORDER_UNIT"
    SIMPLE = "SIMPLE"
    NONTRIVIAL_STATE = "NONTRIVIAL_STATE"
    CONGRUENT = "CONGRUENT"
    ALMOST_UNPERFORATED = "ALMOST_UNPERFORATED"
    SIM_G = "SIM_G"
    PRECSIM_B = "PRECSIM_B"
    PRECSIM_CRITERION = "PRECSIM_CRITERION"
    TYPE_LEQ = "TYPE_LEQ"
    SIM_THETA = "SIM_THETA"
    PRECSIM_GRAPH = "PRECSIM_GRAPH"


class Claim(BaseModel):
    """What a judgement is about.

    ``x`` and ``y`` are monoid elements for monoid claims, point-count
    functions for groupoid claims and vertex functions for graph claims.
    """

    model_config = ConfigDict(frozen=True)

    kind: ClaimKind
    x: Optional[Element] = None
    y: Optional[Element] = None
    n: Optional[int] = Field(None, description="Multiplier found by multiplier searches")

    def __str__(self) -> str:
        parts = [self.kind.value]
        if self.x is not None:
            parts.append(f"x={self.x}")
        if self.y is not None:
            parts.append(f"y={self.y}")
        if self.n is not None:
            parts.append(f"n={self.n}")
        return " ".join(parts)


Pair = Tuple[str, str]


class BFunctionWitness(BaseModel):
    """b = Σ 1_{W_k}, each W_k given by its (source, target) pairs."""

    kind: Literal["bfunction"] = "bfunction"
    model_config = ConfigDict(frozen=True)

    terms: Tuple[Tuple[Pair, ...], ...]
    slack: Optional[Element] = Field(
        None, description="Function h with f + h ∼ g, for type-semigroup comparisons"
    )


class ExhaustiveSearch(BaseModel):
    """Every candidate was examined and none qualifies; replay reruns the search."""

    kind: Literal["exhaustive"] = "exhaustive"
    model_config = ConfigDict(frozen=True)

    method: str
    explored: int


class OrbitSums(BaseModel):
    """Σf and Σg differ on an orbit, so no equidecomposition exists."""

    kind: Literal["orbit_sums"] = "orbit_sums"
    model_config = ConfigDict(frozen=True)

    orbit: Tuple[str, ...]
    lhs_total: int
    rhs_total: int


class ThetaWitness(BaseModel):
    """Θ^p(f) = Θ^q(g)."""

    kind: Literal["theta"] = "theta"
    model_config = ConfigDict(frozen=True)

    p: int
    q: int


class TransferUnit(BaseModel):
    model_config = ConfigDict(frozen=True)

    vertex: str
    group_element: str
    exponent: int


class GraphComparison(BaseModel):
    """Θ^p(f) = Σ_i 1_{v_i} and Σ_i Θ^{k_i}(1_{g_i·v_i}) <= Θ^q(g)."""

    kind: Literal["graph_comparison"] = "graph_comparison"
    model_config = ConfigDict(frozen=True)

    units: Tuple[TransferUnit, ...]
    p: int = 0
    q: int


class TraceWitness(BaseModel):
    """A graph Γ-trace separating two vertex functions."""

    kind: Literal["trace"] = "trace"
    model_config = ConfigDict(frozen=True)

    values: Tuple[Tuple[str, str], ...]


class CompositeCertificate(BaseModel):
    """Independent sub-certificates, one per constituent claim."""

    kind: Literal["composite"] = "composite"
    model_config = ConfigDict(frozen=True)

    labels: Tuple[str, ...]
    parts: Tuple["Certificate", ...]


Certificate = Annotated[
    Union[
        Derivation,
        StateVector,
        BudgetReport,
        FarkasCertificate,
        TableWitness,
        ModularInvariant,
        ClassEnumeration,
        BFunctionWitness,
        ExhaustiveSearch,
        OrbitSums,
        ThetaWitness,
        GraphComparison,
        TraceWitness,
        CompositeCertificate,
    ],
    Field(discriminator="kind"),
]

CompositeCertificate.model_rebuild()


class Judgement(BaseModel):
    model_config = ConfigDict(frozen=True)

    claim: Claim
    verdict: Verdict
    certificate: Optional[Certificate] = None
    notes: Tuple[str, ...] = ()

    @property
    def is_definite(self) -> bool:
        return self.verdict != Verdict.UNKNOWN

    def with_notes(self, *notes: str) -> "Judgement":
        return self.model_copy(update={"notes": self.notes + tuple(notes)})


def composite(parts: List[Tuple[str, BaseModel]]) -> CompositeCertificate:
    return CompositeCertificate(
        labels=tuple(label for label, _ in parts), parts=tuple(part for _, part in parts)
    )


class ReplayOutcome(BaseModel):
    """Result of replaying every certificate found in a report."""

    model_config = ConfigDict(frozen=True)

    accepted: bool
    checked: int = Field(0, description="Certificates replayed")
    skipped: int = Field(0, description="UNKNOWN verdicts and budget reports, which carry nothing to replay")
    failures: Tuple[str, ...] = ()
