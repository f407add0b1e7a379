"""
Directed graphs, finite groups acting on them, and the dichotomy report.

Edges run from ``source`` to ``range``; paths compose as s(e_i) = r(e_{i+1}),
and a source is a vertex that receives no edge.
"""

import re
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.judgement_models import Judgement


class Edge(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    source: str
    range: str


class Graph(BaseModel):
    model_config = ConfigDict(frozen=True)

    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...] = ()

    @model_validator(mode="after")
    def _endpoints(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        names = [e.name for e in self.edges]
        if len(set(names)) != len(names):
            raise ValueError("duplicate edge names")
        declared = set(self.vertices)
        for e in self.edges:
            for end in (e.source, e.range):
                if end not in declared:
                    raise ValueError(f"edge {e.name} uses undeclared vertex '{end}'")
        return self

    def edge(self, name: str) -> Edge:
        return next(e for e in self.edges if e.name == name)

    def incoming(self, v: str) -> List[Edge]:
        """Edges e with r(e) = v."""
        return [e for e in self.edges if e.range == v]

    def sources(self) -> List[str]:
        receiving = {e.range for e in self.edges}
        return [v for v in self.vertices if v not in receiving]

    def in_degree(self, v: str) -> int:
        return sum(1 for e in self.edges if e.range == v)


class FiniteGroup(BaseModel):
    model_config = ConfigDict(frozen=True)

    elements: Tuple[str, ...]
    table: Tuple[Tuple[str, ...], ...] = Field(..., description="table[g][h] = gh")

    @model_validator(mode="after")
    def _group(self):
        n = len(self.elements)
        if n == 0 or len(set(self.elements)) != n:
            raise ValueError("group elements must be nonempty and distinct")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise ValueError("multiplication table must be n x n")
        known = set(self.elements)
        if any(c not in known for row in self.table for c in row):
            raise ValueError("multiplication table uses an unknown element")
        g = self.mult
        for a in self.elements:
            for b in self.elements:
                for c in self.elements:
                    if g(g(a, b), c) != g(a, g(b, c)):
                        raise ValueError(f"multiplication not associative at ({a}, {b}, {c})")
        identity = self.identity
        if identity is None:
            raise ValueError("multiplication table has no identity")
        for a in self.elements:
            if not any(g(a, b) == identity for b in self.elements):
                raise ValueError(f"element {a} has no inverse")
        return self

    @classmethod
    def trivial(cls) -> "FiniteGroup":
        return cls(elements=("e",), table=(("e",),))

    @classmethod
    def cyclic(cls, n: int, prefix: str = "r") -> "FiniteGroup":
        names = tuple("e" if k == 0 else f"{prefix}{k}" for k in range(n))
        return cls(elements=names, table=tuple(tuple(names[(i + j) % n] for j in range(n)) for i in range(n)))

    def mult(self, a: str, b: str) -> str:
        i, j = self.elements.index(a), self.elements.index(b)
        return self.table[i][j]

    @property
    def identity(self) -> Optional[str]:
        for e in self.elements:
            if all(self.mult(e, a) == a and self.mult(a, e) == a for a in self.elements):
                return e
        return None

    def inverse(self, a: str) -> str:
        return next(b for b in self.elements if self.mult(a, b) == self.identity)


class SelfSimilarAction(BaseModel):
    """Γ acting on E by automorphisms with restriction cocycle g|_e."""

    model_config = ConfigDict(frozen=True)

    group: FiniteGroup
    vertex_action: Tuple[Tuple[str, str, str], ...] = Field(
        (), description="(g, v, g·v); omitted entries act trivially"
    )
    edge_action: Tuple[Tuple[str, str, str], ...] = Field(
        (), description="(g, e, g·e); omitted entries act trivially"
    )
    cocycle: Tuple[Tuple[str, str, str], ...] = Field(
        (), description="(g, e, g|_e); omitted entries default to g"
    )

    @classmethod
    def trivial(cls) -> "SelfSimilarAction":
        return cls(group=FiniteGroup.trivial())

    def act_vertex(self, g: str, v: str) -> str:
        for h, a, b in self.vertex_action:
            if h == g and a == v:
                return b
        return v

    def act_edge(self, g: str, e: str) -> str:
        for h, a, b in self.edge_action:
            if h == g and a == e:
                return b
        return e

    def restrict(self, g: str, e: str) -> str:
        for h, a, b in self.cocycle:
            if h == g and a == e:
                return b
        return g


class LayeredGraph(BaseModel):
    """Levels 1..L with edge blocks; block n joins level n+1 (or n itself) to level n.

    With ``period`` p the last p blocks repeat; periodic extension renames
    vertices by their trailing level number (``a3`` → ``a4``).
    """

    model_config = ConfigDict(frozen=True)

    levels: Tuple[Tuple[str, ...], ...]
    blocks: Tuple[Tuple[Tuple[str, str], ...], ...] = Field(
        ..., description="blocks[n-1] holds (source, range) pairs with range in level n"
    )
    period: Optional[int] = None

    @model_validator(mode="after")
    def _shape(self):
        if not self.levels:
            raise ValueError("a layered graph has at least one level")
        if len(self.blocks) != len(self.levels) - 1:
            raise ValueError("expected one edge block per pair of consecutive levels")
        where = {v: n for n, level in enumerate(self.levels) for v in level}
        if len(where) != sum(len(level) for level in self.levels):
            raise ValueError("vertex names must be distinct across levels")
        for n, block in enumerate(self.blocks):
            for s, r in block:
                if where.get(r) != n or where.get(s) not in (n, n + 1):
                    raise ValueError(f"edge {s} -> {r} does not fit block {n + 1}")
            for v in self.levels[n]:
                if not any(r == v and where[s] == n + 1 for s, r in block):
                    raise ValueError(f"vertex {v} receives no edge within the modelled depth")
        if self.period is not None and not 1 <= self.period <= len(self.blocks):
            raise ValueError("period must be between 1 and the number of blocks")
        return self

    @property
    def depth(self) -> int:
        return len(self.blocks)

    def level_of(self) -> Dict[str, int]:
        return {v: n + 1 for n, level in enumerate(self.levels) for v in level}

    def extended(self, depth: int) -> "LayeredGraph":
        """Unroll the periodic rule until there are ``depth`` blocks."""
        if depth <= self.depth:
            return LayeredGraph(
                levels=self.levels[: depth + 1], blocks=self.blocks[:depth], period=None
            )
        if self.period is None:
            raise ValueError(f"layered graph has depth {self.depth} and no period")
        levels = list(self.levels)
        blocks = list(self.blocks)
        p = self.period
        while len(blocks) < depth:
            n = len(blocks)
            blocks.append(tuple((_shift(s, p), _shift(r, p)) for s, r in blocks[n - p]))
            levels.append(tuple(_shift(v, p) for v in levels[n + 1 - p]))
        return LayeredGraph(levels=tuple(levels), blocks=tuple(blocks), period=p)

    def to_graph(self) -> Graph:
        edges = []
        for n, block in enumerate(self.blocks):
            for k, (s, r) in enumerate(block):
                edges.append(Edge(name=f"e{n + 1}_{k + 1}", source=s, range=r))
        return Graph(vertices=tuple(v for level in self.levels for v in level), edges=tuple(edges))


_TRAILING = re.compile(r"^(.*?)(\d+)$")


def _shift(name: str, by: int) -> str:
    match = _TRAILING.match(name)
    if match is None:
        raise ValueError(f"vertex '{name}' has no trailing level number to shift")
    return f"{match.group(1)}{int(match.group(2)) + by}"


class CycleInfo(BaseModel):
    model_config = ConfigDict(frozen=True)

    vertices: Tuple[str, ...]
    edges: Tuple[str, ...]
    has_entrance: bool


class TraceKind(str, Enum):
    EXACT = "EXACT"
    ENCLOSURE = "ENCLOSURE"


class Interval(BaseModel):
    model_config = ConfigDict(frozen=True)

    depth: int
    vertex: str
    lo: Optional[str]
    hi: Optional[str]


class TraceSolution(BaseModel):
    """Trace values as exact strings ("p/q" or "p/q+r/s*phi"), or nested enclosures."""

    model_config = ConfigDict(frozen=True)

    kind: TraceKind
    values: Tuple[Tuple[str, str], ...] = ()
    normalized_vertex: Optional[str] = None
    intervals: Tuple[Interval, ...] = ()
    infeasible_at: Optional[int] = Field(
        None, description="Shallowest depth whose constraint system has no trace"
    )

    def value_map(self) -> Dict[str, str]:
        return dict(self.values)


class TraceCone(BaseModel):
    """Generators of {T >= 0 : T(v) = Σ_{r(e)=v} T(s(e))}."""

    model_config = ConfigDict(frozen=True)

    rays: Tuple[Tuple[Tuple[str, str], ...], ...]
    free_vertices: Tuple[str, ...] = ()
    nontrivial: bool


class DichotomyVerdict(str, Enum):
    PURELY_INFINITE = "PURELY_INFINITE"
    STABLY_FINITE = "STABLY_FINITE"
    NOT_APPLICABLE = "NOT_APPLICABLE"


class DichotomyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    quotient: Graph
    cofinal: bool
    cofinality_witness: Optional[Tuple[Tuple[str, ...], str]] = Field(
        None, description="(cycle component, vertex that cannot reach it)"
    )
    cycles: Tuple[CycleInfo, ...] = ()
    verdict: DichotomyVerdict
    witness: Optional[str] = None
    failed_precondition: Optional[str] = None
    trace: Optional[TraceSolution] = None
    natural_certificate: Tuple[Judgement, ...] = Field(
        (), description="Every vertex congruent to a multiple of one cycle vertex u, then u not paradoxical"
    )
    notes: Tuple[str, ...] = ()
