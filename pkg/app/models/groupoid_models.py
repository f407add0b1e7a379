from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models.lattice_models import FiniteSpace, PointSet, as_points
from app.models.monoid_models import Element
from app.models.state_models import StateVector


class PartialBijection(BaseModel):
    """A bisection of the groupoid, modelled by its (source, target) pairs."""

    model_config = ConfigDict(frozen=True)

    pairs: Tuple[Tuple[str, str], ...] = ()

    @field_validator("pairs")
    @classmethod
    def _injective(cls, pairs):
        pairs = tuple(sorted(set(pairs)))
        sources = [s for s, _ in pairs]
        targets = [t for _, t in pairs]
        if len(set(sources)) != len(sources):
            raise ValueError("partial bijection is not a function")
        if len(set(targets)) != len(targets):
            raise ValueError("partial bijection is not injective")
        return pairs

    @classmethod
    def identity(cls, points: Iterable[str]) -> "PartialBijection":
        return cls(pairs=tuple((x, x) for x in points))

    def mapping(self) -> Dict[str, str]:
        return dict(self.pairs)

    def dom(self) -> FrozenSet[str]:
        return frozenset(s for s, _ in self.pairs)

    def ran(self) -> FrozenSet[str]:
        return frozenset(t for _, t in self.pairs)

    def inverse(self) -> "PartialBijection":
        return PartialBijection(pairs=tuple((t, s) for s, t in self.pairs))

    def after(self, other: "PartialBijection") -> "PartialBijection":
        """self ∘ other: apply ``other`` first."""
        mine = self.mapping()
        return PartialBijection(
            pairs=tuple((s, mine[t]) for s, t in other.pairs if t in mine)
        )

    def restrict(self, subset: Iterable[str]) -> "PartialBijection":
        keep = set(subset)
        return PartialBijection(pairs=tuple((s, t) for s, t in self.pairs if s in keep))

    def is_idempotent(self) -> bool:
        return all(s == t for s, t in self.pairs)

    def is_empty(self) -> bool:
        return not self.pairs

    def __str__(self) -> str:
        if not self.pairs:
            return "∅"
        return ", ".join(f"{s}->{t}" for s, t in self.pairs)


class GroupoidModel(BaseModel):
    """Finite ample model: points, bisection generators, their closure B and opens O."""

    model_config = ConfigDict(frozen=True)

    points: PointSet
    generator_names: Tuple[str, ...]
    generators: Tuple[PartialBijection, ...]
    bisections: Tuple[PartialBijection, ...] = Field(
        ..., description="Closure of the generators under composition and inverse"
    )
    opens: Tuple[PointSet, ...]

    @cached_property
    def unit_space(self) -> FiniteSpace:
        return FiniteSpace(points=self.points, opens=self.opens)

    def space(self) -> FiniteSpace:
        return self.unit_space

    def nonempty_opens(self) -> List[PointSet]:
        return [u for u in self.opens if u]

    def open_name(self, u: Iterable[str]) -> str:
        return open_generator_name(u)


def open_generator_name(u: Iterable[str]) -> str:
    """Generator name used for 1_U in exported presentations, e.g. U_1_2."""
    return "U_" + "_".join(as_points(u))


class BFunction(BaseModel):
    """b = Σ_k 1_{W_k} ∈ F(B), a multiset of bisections."""

    model_config = ConfigDict(frozen=True)

    terms: Tuple[PartialBijection, ...] = ()

    def source_counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for w in self.terms:
            for s, _ in w.pairs:
                out[s] = out.get(s, 0) + 1
        return out

    def range_counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for w in self.terms:
            for _, t in w.pairs:
                out[t] = out.get(t, 0) + 1
        return out


class InvariantSubset(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: PointSet
    is_open: bool
    ideal_generators: Tuple[str, ...] = Field(
        (), description="Exported generators 1_V with V ∈ O and V ⊆ U"
    )


class InvariantStructure(BaseModel):
    model_config = ConfigDict(frozen=True)

    orbits: Tuple[PointSet, ...]
    invariant_opens: Tuple[InvariantSubset, ...]
    ideals: Tuple[Tuple[str, ...], ...] = Field(
        (), description="Distinct ideals of the exported presentation, by generator set"
    )
    ideal_enumeration_saturated: bool = Field(
        ..., description="The ideal enumeration finished and every membership was decided"
    )
    ideals_match_invariant_opens: Optional[bool] = Field(
        None, description="As many ideals as open invariant subsets; None when the enumeration stopped early"
    )
    minimal: bool
    simple_verdict: Optional[str] = None


class SigmaValues(BaseModel):
    """Σf on each orbit: total mass of f over the orbit."""

    model_config = ConfigDict(frozen=True)

    orbits: Tuple[PointSet, ...]
    totals: Tuple[int, ...]

    def as_dict(self) -> Dict[PointSet, int]:
        return dict(zip(self.orbits, self.totals))


class StabilizedModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: GroupoidModel
    n: int
    forward: Tuple[Tuple[str, str], ...] = Field(
        ..., description="x ↦ (x, 1) on points, inducing [f] ↦ [f × 1_{(1,1)}]"
    )

    def lift(self, f: Element) -> Element:
        mapping = dict(self.forward)
        return Element.of({mapping[x]: c for x, c in f.terms})

    def lower(self, f: Element) -> Optional[Element]:
        """Inverse of ``lift`` on functions supported in the first copy."""
        back = {v: k for k, v in self.forward}
        if any(x not in back for x in f.support()):
            return None
        return Element.of({back[x]: c for x, c in f.terms})


class WeightCone(BaseModel):
    """Invariant weights on the points: the cone spanned by orbit indicators."""

    model_config = ConfigDict(frozen=True)

    orbits: Tuple[PointSet, ...]
    rays: Tuple[Tuple[Tuple[str, int], ...], ...]
    rays_induce_states: bool = Field(
        ..., description="Every ray, read as ν(1_U) = Σ_{x∈U} w(x), satisfies the exported relations"
    )
    lp_state: Optional[StateVector] = None
    lp_state_orbit_constant: Optional[bool] = Field(
        None, description="The LP state takes equal values on singleton opens of one orbit"
    )
