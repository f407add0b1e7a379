from functools import cached_property
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

PointSet = Tuple[str, ...]


def as_points(points: Iterable[str]) -> PointSet:
    return tuple(sorted(set(points)))


class FiniteSpace(BaseModel):
    """A finite point set with a union- and intersection-closed family of opens."""

    model_config = ConfigDict(frozen=True)

    points: PointSet
    opens: Tuple[PointSet, ...]

    @field_validator("points")
    @classmethod
    def _points(cls, points):
        if len(set(points)) != len(points):
            raise ValueError("duplicate point names")
        return tuple(points)

    @field_validator("opens")
    @classmethod
    def _canonical(cls, opens):
        return tuple(sorted({as_points(u) for u in opens} | {()}, key=lambda u: (len(u), u)))

    @model_validator(mode="after")
    def _lattice(self):
        """
        A family containing ∅ is ∪/∩-closed iff it holds every minimal
        neighbourhood N(x) and every union u ∪ N(x) of a member with one.
        """
        universe = set(self.points)
        family = self.open_family
        for u in family:
            if not u <= universe:
                raise ValueError(f"open {sorted(u)} is not a subset of the points")
        cells = self.neighbourhoods
        for x, cell in cells.items():
            if cell not in family:
                raise ValueError(f"opens not closed under intersection: no smallest open around {x}")
        for u in family:
            for x, cell in cells.items():
                if u | cell not in family:
                    raise ValueError(f"opens not closed under union: {sorted(u)} ∪ {sorted(cell)}")
        return self

    @classmethod
    def discrete(cls, points: Iterable[str]) -> "FiniteSpace":
        pts = as_points(points)
        opens = [c for r in range(len(pts) + 1) for c in combinations(pts, r)]
        return cls(points=pts, opens=tuple(opens))

    @classmethod
    def generated_by(cls, points: Iterable[str], basis: Iterable[Iterable[str]]) -> "FiniteSpace":
        """The ∪/∩-closure of ``basis`` together with ∅."""
        family = {frozenset()} | {frozenset(b) for b in basis}
        while True:
            grown = family | {u | v for u in family for v in family} | {u & v for u in family for v in family}
            if grown == family:
                break
            family = grown
        return cls(points=as_points(points), opens=tuple(tuple(u) for u in family))

    @cached_property
    def open_family(self) -> FrozenSet[FrozenSet[str]]:
        return frozenset(frozenset(u) for u in self.opens)

    @cached_property
    def neighbourhoods(self) -> Dict[str, FrozenSet[str]]:
        """N(x) for every point lying in some open."""
        cells: Dict[str, FrozenSet[str]] = {}
        for u in self.opens:
            for x in u:
                cells[x] = cells[x] & frozenset(u) if x in cells else frozenset(u)
        return cells

    def open_sets(self) -> List[FrozenSet[str]]:
        return [frozenset(u) for u in self.opens]

    def is_open(self, subset: Iterable[str]) -> bool:
        return frozenset(subset) in self.open_family

    def interior(self, subset: Iterable[str]) -> FrozenSet[str]:
        """Largest open inside ``subset``; the whole space counts as open."""
        target = frozenset(subset)
        if target >= set(self.points):
            return frozenset(self.points)
        out: FrozenSet[str] = frozenset()
        for x, cell in self.neighbourhoods.items():
            if x in target and cell <= target:
                out |= cell
        return out

    def closure(self, subset: Iterable[str]) -> FrozenSet[str]:
        universe = frozenset(self.points)
        return universe - self.interior(universe - frozenset(subset))

    def neighbourhood(self, point: str) -> FrozenSet[str]:
        """Minimal open neighbourhood of a point."""
        return self.neighbourhoods.get(point, frozenset(self.points))


class LscFn(BaseModel):
    """f = Σ 1_{U_k} for a decreasing chain U_1 ⊇ U_2 ⊇ … of nonempty opens."""

    model_config = ConfigDict(frozen=True)

    chain: Tuple[PointSet, ...] = ()

    @field_validator("chain")
    @classmethod
    def _decreasing(cls, chain):
        chain = tuple(as_points(u) for u in chain)
        for upper, lower in zip(chain, chain[1:]):
            if not set(lower) <= set(upper):
                raise ValueError("level sets must decrease")
        if any(not u for u in chain):
            raise ValueError("level sets must be nonempty")
        return chain

    def value(self, point: str) -> int:
        return sum(1 for u in self.chain if point in u)

    def values(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for u in self.chain:
            for x in u:
                out[x] = out.get(x, 0) + 1
        return out

    def support(self) -> FrozenSet[str]:
        return frozenset(self.chain[0]) if self.chain else frozenset()

    def is_zero(self) -> bool:
        return not self.chain

    def __str__(self) -> str:
        if not self.chain:
            return "0"
        return " + ".join("1{" + ",".join(u) + "}" for u in self.chain)


class Decomposition(BaseModel):
    """W[i][j]: open pieces of K_i placed inside V_j."""

    model_config = ConfigDict(frozen=True)

    pieces: Tuple[Tuple[PointSet, ...], ...]
    sigma: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...] = Field(
        (), description="Index strata (I, J) matched while peeling, outermost first"
    )

    def piece(self, i: int, j: int) -> FrozenSet[str]:
        return frozenset(self.pieces[i][j])


class DimensionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    valid: bool
    violated_axiom: Optional[str] = None
    witness: Optional[str] = None
    atoms: Tuple[Tuple[PointSet, str], ...] = ()
    extension: Tuple[Tuple[PointSet, str], ...] = Field(
        (), description="Measure of every set in the algebra generated by the opens"
    )
