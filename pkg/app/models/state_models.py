from enum import Enum
from fractions import Fraction
from typing import Dict, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models.monoid_models import Element, MonoidPresentation
from app.utils.rationals import INF, ExtRational, evaluate, ext, ext_le, fmt


class StateVector(BaseModel):
    """Generator values in [0, ∞], stored as exact strings "p/q" or "INF"."""

    kind: Literal["state"] = "state"
    model_config = ConfigDict(frozen=True)

    values: Tuple[Tuple[str, str], ...]

    @field_validator("values")
    @classmethod
    def _canonical(cls, values):
        out = []
        for name, raw in values:
            value = ext(raw)
            if value is not INF and value < 0:
                raise ValueError(f"state value for '{name}' is negative")
            out.append((name, fmt(value)))
        return tuple(sorted(out))

    @classmethod
    def of(cls, values: Mapping[str, ExtRational]) -> "StateVector":
        return cls(values=tuple((name, fmt(v)) for name, v in values.items()))

    def as_dict(self) -> Dict[str, ExtRational]:
        return {name: ext(raw) for name, raw in self.values}

    def value(self, name: str) -> ExtRational:
        return self.as_dict()[name]

    def evaluate(self, x: Element) -> ExtRational:
        return evaluate(self.as_dict(), x.as_dict())

    def violated_relation(self, presentation: MonoidPresentation) -> Optional[int]:
        """Index of the first rule ν(lhs) <= ν(rhs) that fails, or None."""
        for rule in presentation.rules():
            if not ext_le(self.evaluate(rule.lhs), self.evaluate(rule.rhs)):
                return rule.relation_index
        return None

    def is_trivial(self) -> bool:
        return all(v is INF or v == 0 for v in self.as_dict().values())


class FarkasCertificate(BaseModel):
    """Infeasibility of ν(y) = 1 on the forced generators, as row multipliers."""

    kind: Literal["farkas"] = "farkas"
    model_config = ConfigDict(frozen=True)

    target: Element
    forced: Tuple[str, ...]
    multipliers: Tuple[str, ...]

    def fractions(self) -> List[Fraction]:
        return [Fraction(m) for m in self.multipliers]


class DualBound(BaseModel):
    """Dual multipliers proving max ν(x) <= bound subject to ν(y) = 1."""

    kind: Literal["dual_bound"] = "dual_bound"
    model_config = ConfigDict(frozen=True)

    objective: Element
    target: Element
    forced: Tuple[str, ...]
    multipliers: Tuple[str, ...]
    bound: str


class LPStatusKind(str, Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


class EliminationSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    variable: str
    method: str
    zero: int
    positive: int
    negative: int
    rows_after: int


class LPOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: LPStatusKind
    optimum: Optional[str] = Field(None, description="Exact optimum when bounded")
    state: Optional[StateVector] = None
    farkas: Optional[FarkasCertificate] = None
    dual: Optional[DualBound] = None
    forced: Tuple[str, ...] = Field((), description="Generators forced finite by ν(y) < ∞")
    budget_ambiguous: Tuple[str, ...] = Field(
        (), description="Forced generators that bounded search did not place in ⟨y⟩ directly"
    )
    elimination_agrees: Optional[bool] = Field(
        None, description="Fourier–Motzkin cross-check of the feasibility verdict"
    )
    elimination: Tuple[EliminationSummary, ...] = ()
    pivots: int = 0

    @property
    def optimum_value(self) -> Optional[ExtRational]:
        return None if self.optimum is None else ext(self.optimum)


class ExtensionCertificate(BaseModel):
    """One inequality q·y + k·u <= p·y + B found while extending a state."""

    model_config = ConfigDict(frozen=True)

    element: Element
    q: int
    k: int
    p: int
    extra: Element = Element()
    value: str


class StateExtension(BaseModel):
    model_config = ConfigDict(frozen=True)

    order: Tuple[Element, ...]
    values: Tuple[Tuple[str, str], ...]
    certificates: Tuple[ExtensionCertificate, ...]
    combinations_checked: int
    consistent: bool
    paradox_evidence: Optional[str] = None
    x_value: Optional[str] = None
    complete: bool = Field(
        False, description="Every element obtained a certificate within the enumeration caps"
    )

    def value_of(self, x: Element) -> ExtRational:
        return ext(dict(self.values)[str(x)])
