from enum import Enum
from typing import Dict, Iterable, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Element(BaseModel):
    """An ℕ-linear combination of generators; the empty combination is 0."""

    model_config = ConfigDict(frozen=True)

    terms: Tuple[Tuple[str, int], ...] = Field(
        default=(), description="Sorted (generator, positive coefficient) pairs"
    )

    @field_validator("terms")
    @classmethod
    def _canonical(cls, terms):
        merged: Dict[str, int] = {}
        for name, coefficient in terms:
            if coefficient < 0:
                raise ValueError(f"negative coefficient {coefficient} for '{name}'")
            merged[name] = merged.get(name, 0) + coefficient
        return tuple(sorted((n, c) for n, c in merged.items() if c))

    @classmethod
    def of(cls, coefficients: Optional[Mapping[str, int]] = None, **named: int) -> "Element":
        items = dict(coefficients or {})
        items.update(named)
        return cls(terms=tuple(items.items()))

    @classmethod
    def zero(cls) -> "Element":
        return cls()

    @classmethod
    def generator(cls, name: str, multiple: int = 1) -> "Element":
        return cls(terms=((name, multiple),))

    @classmethod
    def from_vector(cls, generators: Iterable[str], vector: Iterable[int]) -> "Element":
        return cls(terms=tuple(zip(generators, vector)))

    def coefficient(self, name: str) -> int:
        return dict(self.terms).get(name, 0)

    def as_dict(self) -> Dict[str, int]:
        return dict(self.terms)

    def support(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def total(self) -> int:
        return sum(c for _, c in self.terms)

    def to_vector(self, generators: Iterable[str]) -> Tuple[int, ...]:
        lookup = dict(self.terms)
        return tuple(lookup.get(g, 0) for g in generators)

    def __add__(self, other: "Element") -> "Element":
        return Element(terms=self.terms + other.terms)

    def scale(self, n: int) -> "Element":
        return Element(terms=tuple((g, c * n) for g, c in self.terms))

    def dominates(self, other: "Element") -> bool:
        """Componentwise self >= other."""
        mine = dict(self.terms)
        return all(mine.get(g, 0) >= c for g, c in other.terms)

    def minus(self, other: "Element") -> "Element":
        """Componentwise difference; requires ``self.dominates(other)``."""
        mine = dict(self.terms)
        for g, c in other.terms:
            mine[g] = mine.get(g, 0) - c
            if mine[g] < 0:
                raise ValueError("difference would be negative")
        return Element.of(mine)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(g if c == 1 else f"{c}*{g}" for g, c in self.terms)


class RelationKind(str, Enum):
    LEQ = "LEQ"
    EQ = "EQ"


class Relation(BaseModel):
    model_config = ConfigDict(frozen=True)

    lhs: Element
    rhs: Element
    kind: RelationKind = RelationKind.LEQ

    def __str__(self) -> str:
        op = "<=" if self.kind == RelationKind.LEQ else "=="
        return f"{self.lhs} {op} {self.rhs}"


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class LeqRule(BaseModel):
    """One oriented inequality ``lhs <= rhs`` derived from a relation."""

    model_config = ConfigDict(frozen=True)

    relation_index: int
    direction: Direction
    lhs: Element
    rhs: Element


class MonoidPresentation(BaseModel):
    """Generators and relations of a finitely presented preordered monoid."""

    model_config = ConfigDict(frozen=True)

    generators: Tuple[str, ...]
    relations: Tuple[Relation, ...] = ()

    @model_validator(mode="after")
    def _declared(self):
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("duplicate generator names")
        declared = set(self.generators)
        for i, relation in enumerate(self.relations):
            for name in relation.lhs.support() + relation.rhs.support():
                if name not in declared:
                    raise ValueError(f"relation {i} uses undeclared generator '{name}'")
        return self

    def rules(self) -> List[LeqRule]:
        """EQ relations split into a forward and a backward LEQ rule."""
        out = []
        for i, relation in enumerate(self.relations):
            out.append(LeqRule(relation_index=i, direction=Direction.FORWARD, lhs=relation.lhs, rhs=relation.rhs))
            if relation.kind == RelationKind.EQ:
                out.append(LeqRule(relation_index=i, direction=Direction.BACKWARD, lhs=relation.rhs, rhs=relation.lhs))
        return out

    def rule(self, relation_index: int, direction: Direction) -> LeqRule:
        relation = self.relations[relation_index]
        if direction == Direction.FORWARD:
            return LeqRule(relation_index=relation_index, direction=direction, lhs=relation.lhs, rhs=relation.rhs)
        if relation.kind != RelationKind.EQ:
            raise ValueError(f"relation {relation_index} is not an equality")
        return LeqRule(relation_index=relation_index, direction=direction, lhs=relation.rhs, rhs=relation.lhs)

    def with_relations(self, extra: Iterable[Relation]) -> "MonoidPresentation":
        return MonoidPresentation(generators=self.generators, relations=self.relations + tuple(extra))

    def undeclared(self, x: Element) -> Optional[str]:
        declared = set(self.generators)
        return next((g for g in x.support() if g not in declared), None)


class FiniteMonoid(BaseModel):
    """An explicitly tabulated preordered abelian monoid, validated eagerly."""

    model_config = ConfigDict(frozen=True)

    elements: Tuple[str, ...]
    add: Tuple[Tuple[int, ...], ...]
    zero: int
    leq: Tuple[Tuple[bool, ...], ...]

    @model_validator(mode="after")
    def _validate(self):
        n = len(self.elements)
        if n == 0:
            raise ValueError("a monoid has at least the zero element")
        if len(set(self.elements)) != n:
            raise ValueError("duplicate element names")
        if not 0 <= self.zero < n:
            raise ValueError("zero index out of range")
        if len(self.add) != n or any(len(row) != n for row in self.add):
            raise ValueError("add table must be n x n")
        if len(self.leq) != n or any(len(row) != n for row in self.leq):
            raise ValueError("leq matrix must be n x n")
        r = range(n)
        for a in r:
            for b in r:
                if not 0 <= self.add[a][b] < n:
                    raise ValueError(f"add[{a}][{b}] out of range")
        for a in r:
            if self.add[self.zero][a] != a:
                raise ValueError(f"zero is not neutral for {self.elements[a]}")
            for b in r:
                if self.add[a][b] != self.add[b][a]:
                    raise ValueError(f"add not commutative at ({self.elements[a]}, {self.elements[b]})")
                for c in r:
                    if self.add[self.add[a][b]][c] != self.add[a][self.add[b][c]]:
                        raise ValueError(
                            f"add not associative at ({self.elements[a]}, {self.elements[b]}, {self.elements[c]})"
                        )
        for a in r:
            if not self.leq[a][a]:
                raise ValueError(f"leq not reflexive at {self.elements[a]}")
            if not self.leq[self.zero][a]:
                raise ValueError(f"0 <= {self.elements[a]} fails")
            for b in r:
                if not self.leq[a][b]:
                    continue
                for c in r:
                    if self.leq[b][c] and not self.leq[a][c]:
                        raise ValueError(
                            f"leq not transitive at ({self.elements[a]}, {self.elements[b]}, {self.elements[c]})"
                        )
                    if not self.leq[self.add[a][c]][self.add[b][c]]:
                        raise ValueError(
                            f"leq not translation invariant at ({self.elements[a]}, {self.elements[b]}, {self.elements[c]})"
                        )
        return self

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, name: str) -> int:
        return self.elements.index(name)

    def sum(self, a: int, b: int) -> int:
        return self.add[a][b]

    def multiple(self, k: int, a: int) -> int:
        out = self.zero
        for _ in range(k):
            out = self.add[out][a]
        return out

    def le(self, a: int, b: int) -> bool:
        return self.leq[a][b]

    def evaluate(self, x: Element) -> int:
        """Evaluate a combination of element names through the table."""
        out = self.zero
        for name, c in x.terms:
            out = self.add[out][self.multiple(c, self.index(name))]
        return out

    def nonzero(self) -> List[int]:
        return [a for a in range(self.size) if a != self.zero]


class SearchBudget(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_max: int = Field(8, ge=1, description="Largest multiplier tried in multiplier searches")
    coeff_cap: int = Field(32, ge=1, description="Per-generator coefficient cap")
    node_cap: int = Field(1_000_000, ge=1, description="Search nodes expanded before giving up")

    @classmethod
    def from_config(cls) -> "SearchBudget":
        from app.config.analysis_config import analysis_config

        return cls(
            n_max=analysis_config.budget_n,
            coeff_cap=analysis_config.budget_coeff,
            node_cap=analysis_config.budget_nodes,
        )


class StepRule(str, Enum):
    RELATION = "relation"
    AXIOM = "axiom"


class DerivationStep(BaseModel):
    """v = lhs + context → rhs + context, or v → v + added (the 0 <= g axiom)."""

    model_config = ConfigDict(frozen=True)

    rule: StepRule
    relation_index: Optional[int] = None
    direction: Optional[Direction] = None
    context: Element = Element()
    added: Optional[str] = None


class Derivation(BaseModel):
    kind: Literal["derivation"] = "derivation"
    model_config = ConfigDict(frozen=True)

    start: Element
    steps: Tuple[DerivationStep, ...] = ()
    end: Element

    def shifted(self, z: Element) -> "Derivation":
        """The same step list translated by z (translation invariance)."""
        steps = tuple(
            step.model_copy(update={"context": step.context + z})
            if step.rule == StepRule.RELATION
            else step
            for step in self.steps
        )
        return Derivation(start=self.start + z, steps=steps, end=self.end + z)

    def then(self, other: "Derivation") -> "Derivation":
        if other.start != self.end:
            raise ValueError("derivations do not compose")
        return Derivation(start=self.start, steps=self.steps + other.steps, end=other.end)




class BudgetReport(BaseModel):
    kind: Literal["budget"] = "budget"
    model_config = ConfigDict(frozen=True)

    n_max: int
    coeff_cap: int
    node_cap: int
    nodes_explored: int = 0
    pruned: bool = False
    saturated: bool = Field(
        False, description="The searched closure was enumerated completely within the caps"
    )
    reason: str = ""

    @classmethod
    def for_budget(cls, budget: SearchBudget, **fields) -> "BudgetReport":
        return cls(n_max=budget.n_max, coeff_cap=budget.coeff_cap, node_cap=budget.node_cap, **fields)


class TableWitness(BaseModel):
    """Exact evidence read off a FiniteMonoid table."""

    kind: Literal["table"] = "table"
    model_config = ConfigDict(frozen=True)

    holds: bool
    n: Optional[int] = None
    lhs: Optional[str] = None
    rhs: Optional[str] = None
    checked_up_to: Optional[int] = None
    note: str = ""


class ModularInvariant(BaseModel):
    """Additive map generators → ℤ/m constant on every EQ relation."""

    kind: Literal["modular"] = "modular"
    model_config = ConfigDict(frozen=True)

    modulus: int
    values: Tuple[Tuple[str, int], ...]

    def apply(self, x: Element) -> int:
        lookup = dict(self.values)
        return sum(lookup.get(g, 0) * c for g, c in x.terms) % self.modulus


class ClassEnumeration(BaseModel):
    """A congruence class enumerated completely."""

    kind: Literal["class"] = "class"
    model_config = ConfigDict(frozen=True)

    members: Tuple[Element, ...]


class LemmaCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    holds: bool
    counterexample: Optional[str] = None


class LemmaReport(BaseModel):
    """Exhaustive verification of the structural lemmas on one table."""

    model_config = ConfigDict(frozen=True)

    checks: Tuple[LemmaCheck, ...]

    @property
    def all_hold(self) -> bool:
        return all(check.holds for check in self.checks)

    def failed(self) -> List[LemmaCheck]:
        return [check for check in self.checks if not check.holds]
