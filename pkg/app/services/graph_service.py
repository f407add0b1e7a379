"""
Directed graphs with self-similar group actions: the Θ operator, the
relations ∼_Θ and ≼ on vertex functions, quotient graphs, cofinality,
cycles with entrances, graph traces and the dichotomy classifier.

Vertex functions are ``Element`` values keyed by vertex names. Edges run
from ``source`` to ``range`` and Θ(1_w) = Σ_{r(e)=w} 1_{s(e)}.
"""

import time
from collections import deque
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

import logfire
import networkx as nx

from app.config.analysis_config import analysis_config
from app.exceptions import (
    BaseAnalysisException,
    ValidationException,
    cycle_cap_exceeded,
    premise_violated,
    sources_present,
    undeclared_generator,
)
from app.models.error_models import ErrorCode
from app.models.graph_models import (
    CycleInfo,
    DichotomyReport,
    DichotomyVerdict,
    Edge,
    Graph,
    LayeredGraph,
    SelfSimilarAction,
    TraceCone,
    TraceKind,
    TraceSolution,
)
from app.models.judgement_models import (
    Claim,
    ClaimKind,
    GraphComparison,
    Judgement,
    ThetaWitness,
    TraceWitness,
    TransferUnit,
    Verdict,
)
from app.models.monoid_models import (
    BudgetReport,
    Element,
    MonoidPresentation,
    Relation,
    RelationKind,
    SearchBudget,
)
from app.services.drunken_service import DrunkenService
from app.services.monoid_service import MonoidService
from app.utils.linear_program import LinearProgram, LPStatus, Sense
from app.utils.rationals import fmt

# supports are enumerated exhaustively up to this many vertices
RAY_SUPPORT_LIMIT = 12

CofinalityWitness = Tuple[Tuple[str, ...], str]

_SIMPLICITY_NOTE = (
    "cofinality is checked combinatorially; simplicity of the C*-algebra itself is not decided"
)


class _NodeCapReached(Exception):
    pass


class GraphService:
    """
    Service class for graphs, self-similar actions and their type semigroups.
    """

    # ------------------------------------------------------------------
    # Θ calculus
    # ------------------------------------------------------------------

    @staticmethod
    def check_vertex_fn(graph: Graph, f: Element) -> None:
        for name in f.support():
            if name not in graph.vertices:
                raise undeclared_generator(name, list(graph.vertices))

    @staticmethod
    def _feeders(graph: Graph) -> Dict[str, List[str]]:
        """w -> [s(e) for every e with r(e) = w], with multiplicity."""
        feeders: Dict[str, List[str]] = {v: [] for v in graph.vertices}
        for e in graph.edges:
            feeders[e.range].append(e.source)
        return feeders

    @staticmethod
    def theta(graph: Graph, f: Element, n: int = 1) -> Element:
        """
        Apply Θ n times; Θ^0 is the identity.

        Args:
            graph: Finite graph
            f: Vertex function
            n: Exponent, n >= 0

        Returns:
            Element: Θ^n(f), with Θ(f)(v) = Σ_{s(e)=v} f(r(e))
        """
        if n < 0:
            raise ValidationException(
                message="Θ exponent must be nonnegative",
                field="n",
                value=n,
                constraint=">= 0",
            )
        GraphService.check_vertex_fn(graph, f)
        feeders = GraphService._feeders(graph)
        current = f.as_dict()
        for _ in range(n):
            out: Dict[str, int] = {}
            for w, c in current.items():
                for v in feeders[w]:
                    out[v] = out.get(v, 0) + c
            current = out
        return Element.of(current)

    @staticmethod
    def sim_theta(graph: Graph, f: Element, g: Element, budget: SearchBudget) -> Judgement:
        """
        Decide f ∼_Θ g, that is Θ^p(f) = Θ^q(g) for some p, q.

        Exponents up to ``budget.n_max`` are tried in order of p + q. A graph
        trace with T(f) != T(g) refutes the claim; otherwise the answer is
        UNKNOWN.
        """
        claim = Claim(kind=ClaimKind.SIM_THETA, x=f, y=g)
        GraphService.check_vertex_fn(graph, f)
        GraphService.check_vertex_fn(graph, g)
        start_time = time.time()
        with logfire.span("graph.sim_theta", f=str(f), g=str(g), n_max=budget.n_max):
            powers_f = [f]
            powers_g = [g]
            for _ in range(budget.n_max):
                powers_f.append(GraphService.theta(graph, powers_f[-1]))
                powers_g.append(GraphService.theta(graph, powers_g[-1]))
            for total in range(2 * budget.n_max + 1):
                for p in range(max(0, total - budget.n_max), min(total, budget.n_max) + 1):
                    q = total - p
                    if powers_f[p] == powers_g[q]:
                        logfire.info("graph.sim_theta proved", p=p, q=q)
                        return Judgement(claim=claim, verdict=Verdict.PROVED, certificate=ThetaWitness(p=p, q=q))

            trivial = SelfSimilarAction.trivial()
            for lhs, rhs in ((f, g), (g, f)):
                witness = GraphService.separating_trace(graph, trivial, lhs, rhs)
                if witness is not None:
                    return Judgement(
                        claim=claim,
                        verdict=Verdict.REFUTED,
                        certificate=witness,
                        notes=(f"graph trace separates {lhs} from {rhs}",),
                    )

            logfire.warn(
                "graph.sim_theta budget exhausted",
                execution_time=round(time.time() - start_time, 4),
            )
            return Judgement(
                claim=claim,
                verdict=Verdict.UNKNOWN,
                certificate=BudgetReport.for_budget(budget, reason="no exponents p, q <= n_max match"),
            )

    @staticmethod
    def _translates(graph: Graph, action: SelfSimilarAction, v: str) -> List[Tuple[str, str]]:
        """(g, g·v) for each distinct image g·v."""
        seen: Dict[str, str] = {}
        for g in action.group.elements:
            seen.setdefault(action.act_vertex(g, v), g)
        return [(g, w) for w, g in seen.items()]

    @staticmethod
    def precsim_graph(
        graph: Graph,
        f: Element,
        g: Element,
        action: Optional[SelfSimilarAction],
        budget: SearchBudget,
    ) -> Judgement:
        """
        Decide f ≼ g for the action of Γ on the graph.

        A proof is Θ^p(f) = Σ_i 1_{v_i} together with group elements h_i and
        exponents k_i such that Σ_i Θ^{k_i}(1_{h_i·v_i}) <= Θ^q(g). Every
        unit of Θ^p(f) is placed by backtracking; p and q range over
        0..n_max and p is skipped once Θ^p(f) has more than coeff_cap units.

        Returns:
            Judgement: PROVED with a GraphComparison, REFUTED by a graph
            Γ-trace with T(f) > T(g), else UNKNOWN
        """
        action = action or SelfSimilarAction.trivial()
        claim = Claim(kind=ClaimKind.PRECSIM_GRAPH, x=f, y=g)
        GraphService.check_vertex_fn(graph, f)
        GraphService.check_vertex_fn(graph, g)
        GraphService.check_action(graph, action)
        start_time = time.time()
        with logfire.span("graph.precsim_graph", f=str(f), g=str(g), n_max=budget.n_max):
            powers_f = [f]
            powers_g = [g]
            for _ in range(budget.n_max):
                powers_f.append(GraphService.theta(graph, powers_f[-1]))
                powers_g.append(GraphService.theta(graph, powers_g[-1]))

            explored = 0
            try:
                for level in range(budget.n_max + 1):
                    for p, q in _pairs_at_level(level):
                        if powers_f[p].total() > budget.coeff_cap:
                            continue
                        found, explored = GraphService._place_units(
                            graph, action, powers_f[p], powers_g[q], q, budget, explored
                        )
                        if found is not None:
                            logfire.info("graph.precsim_graph proved", p=p, q=q, nodes=explored)
                            return Judgement(
                                claim=claim,
                                verdict=Verdict.PROVED,
                                certificate=GraphComparison(units=tuple(found), p=p, q=q),
                            )
            except _NodeCapReached as e:
                explored = e.args[0]
                logfire.warn("graph.precsim_graph node cap reached", nodes=explored)

            witness = GraphService.separating_trace(graph, action, f, g)
            if witness is not None:
                return Judgement(claim=claim, verdict=Verdict.REFUTED, certificate=witness)

            logfire.warn(
                "graph.precsim_graph budget exhausted",
                nodes=explored,
                execution_time=round(time.time() - start_time, 4),
            )
            return Judgement(
                claim=claim,
                verdict=Verdict.UNKNOWN,
                certificate=BudgetReport.for_budget(
                    budget, nodes_explored=explored, reason="no comparison within the exponent bound"
                ),
            )

    @staticmethod
    def _place_units(
        graph: Graph,
        action: SelfSimilarAction,
        source: Element,
        target: Element,
        q: int,
        budget: SearchBudget,
        explored: int,
    ) -> Tuple[Optional[List[TransferUnit]], int]:
        units = [v for v, c in source.terms for _ in range(c)]
        options: Dict[str, List[Tuple[TransferUnit, Dict[str, int]]]] = {}
        for v in set(units):
            choices = []
            for h, w in GraphService._translates(graph, action, v):
                for k in range(q + 1):
                    image = GraphService.theta(graph, Element.generator(w), k).as_dict()
                    choices.append((TransferUnit(vertex=v, group_element=h, exponent=k), image))
            options[v] = choices
        failed: Set[Tuple[int, int, Tuple[Tuple[str, int], ...]]] = set()
        chosen: List[TransferUnit] = []
        counter = [explored]

        def place(i: int, floor: int, capacity: Dict[str, int]) -> bool:
            if i == len(units):
                return True
            key = (i, floor, tuple(sorted(capacity.items())))
            if key in failed:
                return False
            counter[0] += 1
            if counter[0] > budget.node_cap:
                raise _NodeCapReached(counter[0])
            # equal consecutive units take nondecreasing option indices
            for j, (unit, image) in enumerate(options[units[i]]):
                if j < floor:
                    continue
                if any(capacity.get(x, 0) < c for x, c in image.items()):
                    continue
                rest = dict(capacity)
                for x, c in image.items():
                    rest[x] -= c
                chosen.append(unit)
                next_floor = j if i + 1 < len(units) and units[i + 1] == units[i] else 0
                if place(i + 1, next_floor, rest):
                    return True
                chosen.pop()
            failed.add(key)
            return False

        ok = place(0, 0, target.as_dict())
        return (list(chosen) if ok else None), counter[0]

    # ------------------------------------------------------------------
    # traces
    # ------------------------------------------------------------------

    @staticmethod
    def separating_trace(
        graph: Graph, action: SelfSimilarAction, f: Element, g: Element
    ) -> Optional[TraceWitness]:
        """
        A graph Γ-trace with T(f) > T(g), if one exists.

        Finite traces come from an LP normalised by Σ T = 1; when every
        finite trace vanishes on f, the trace that is ∞ on the forward
        closure of Γ·supp(f) and 0 elsewhere is tried.
        """
        names = list(graph.vertices)
        lp = GraphService._trace_program(graph, action, boundary=())
        lp.add_row([1] * len(names), Sense.EQ, 1, "normalised")
        lp.set_objective([f.coefficient(v) - g.coefficient(v) for v in names])
        result = lp.solve()
        if result.status == LPStatus.OPTIMAL and result.optimum > 0:
            logfire.info("graph.separating_trace finite", optimum=str(result.optimum))
            return TraceWitness(values=tuple((v, fmt(x)) for v, x in zip(names, result.point)))

        closure = GraphService._forward_closure(graph, action, f.support())
        feeders = GraphService._feeders(graph)
        if not closure or any(v in closure for v in g.support()):
            return None
        if not all(any(s in closure for s in feeders[w]) for w in closure):
            return None
        logfire.info("graph.separating_trace infinite", support=sorted(closure))
        return TraceWitness(values=tuple((v, "INF" if v in closure else "0") for v in names))

    @staticmethod
    def _forward_closure(graph: Graph, action: SelfSimilarAction, start: Sequence[str]) -> Set[str]:
        reached: Set[str] = set()
        queue = deque(start)
        while queue:
            v = queue.popleft()
            if v in reached:
                continue
            reached.add(v)
            for h in action.group.elements:
                queue.append(action.act_vertex(h, v))
            for e in graph.edges:
                if e.source == v:
                    queue.append(e.range)
        return reached

    @staticmethod
    def _trace_program(graph: Graph, action: SelfSimilarAction, boundary: Sequence[str]) -> LinearProgram:
        """T >= 0, T(v) = Σ_{r(e)=v} T(s(e)) off the boundary, T(v) = T(h·v)."""
        names = list(graph.vertices)
        index = {v: j for j, v in enumerate(names)}
        feeders = GraphService._feeders(graph)
        lp = LinearProgram(len(names), names)
        for v in names:
            if v in boundary:
                continue
            row = [Fraction(0)] * len(names)
            row[index[v]] += 1
            for s in feeders[v]:
                row[index[s]] -= 1
            lp.add_row(row, Sense.EQ, 0, f"trace at {v}")
        for h in action.group.elements:
            for v in names:
                w = action.act_vertex(h, v)
                if w != v:
                    row = [Fraction(0)] * len(names)
                    row[index[v]] += 1
                    row[index[w]] -= 1
                    lp.add_row(row, Sense.EQ, 0, f"invariance {h}·{v}")
        return lp

    @staticmethod
    def graph_trace_cone(graph: Graph) -> TraceCone:
        """
        Generators of {T >= 0 : T(v) = Σ_{r(e)=v} T(s(e))}.

        Vertices that receive no edge are free boundary values, as in a
        truncated graph. Extreme rays are found as the solutions with
        minimal support, each normalised to total 1; above
        RAY_SUPPORT_LIMIT vertices only nontriviality is decided.
        """
        names = list(graph.vertices)
        free = tuple(graph.sources())
        with logfire.span("graph.graph_trace_cone", vertices=len(names)):
            if len(names) > RAY_SUPPORT_LIMIT:
                lp = GraphService._trace_program(graph, SelfSimilarAction.trivial(), boundary=free)
                lp.add_row([1] * len(names), Sense.EQ, 1, "normalised")
                nontrivial = lp.solve().status != LPStatus.INFEASIBLE
                logfire.warn("graph.graph_trace_cone rays not enumerated", vertices=len(names))
                return TraceCone(rays=(), free_vertices=free, nontrivial=nontrivial)

            feeders = GraphService._feeders(graph)
            equations = []
            for v in names:
                if v in free:
                    continue
                row = {v: Fraction(1)}
                for s in feeders[v]:
                    row[s] = row.get(s, Fraction(0)) - 1
                equations.append(row)

            rays = []
            for size in range(1, len(names) + 1):
                for support in combinations(names, size):
                    if any(set(support) > set(dict(ray)) for ray in rays):
                        continue
                    vector = _positive_kernel_vector(equations, support)
                    if vector is not None:
                        rays.append(tuple((v, fmt(x)) for v, x in zip(support, vector)))
            logfire.info("graph.graph_trace_cone done", rays=len(rays))
            return TraceCone(rays=tuple(rays), free_vertices=free, nontrivial=bool(rays))

    @staticmethod
    def trace_violation(
        graph: Graph,
        values: Mapping[str, Fraction],
        action: Optional[SelfSimilarAction] = None,
        boundary: Sequence[str] = (),
    ) -> Optional[str]:
        """First failed graph Γ-trace identity, or None."""
        feeders = GraphService._feeders(graph)
        for v in graph.vertices:
            if v in boundary:
                continue
            total = sum((values[s] for s in feeders[v]), Fraction(0))
            if values[v] != total:
                return f"T({v}) = {fmt(values[v])} but the incoming sum is {fmt(total)}"
        if action is not None:
            for h in action.group.elements:
                for v in graph.vertices:
                    if values[v] != values[action.act_vertex(h, v)]:
                        return f"T({v}) != T({h}·{v})"
        return None

    @staticmethod
    def gamma_trace_convert(
        graph: Graph,
        action: SelfSimilarAction,
        quotient_values: Mapping[str, Fraction],
        normalised: bool = True,
    ) -> Dict[str, Fraction]:
        """
        Lift a trace on E/Γ to a graph Γ-trace on E.

        With ``normalised`` the orbit mass is spread evenly,
        T(v) = |Γv|^{-1}[T]([v]), which keeps Σ T = Σ [T]; otherwise
        T(v) = [T]([v]).
        """
        reps = GraphService.orbit_representatives(graph, action)
        sizes = GraphService._orbit_sizes(reps)
        out = {}
        for v in graph.vertices:
            value = Fraction(quotient_values[reps[v]])
            out[v] = value / sizes[reps[v]] if normalised else value
        violated = GraphService.trace_violation(graph, out, action)
        if violated is not None:
            logfire.warn("graph.gamma_trace_convert result is not a Γ-trace", violated=violated)
        return out

    @staticmethod
    def quotient_trace(
        graph: Graph,
        action: SelfSimilarAction,
        values: Mapping[str, Fraction],
        normalised: bool = True,
    ) -> Dict[str, Fraction]:
        """Inverse of ``gamma_trace_convert``; the input must be Γ-invariant."""
        reps = GraphService.orbit_representatives(graph, action)
        sizes = GraphService._orbit_sizes(reps)
        out: Dict[str, Fraction] = {}
        for v in graph.vertices:
            value = Fraction(values[v])
            lifted = value * sizes[reps[v]] if normalised else value
            if out.setdefault(reps[v], lifted) != lifted:
                raise premise_violated(
                    "quotient_trace", "T(v) = T(g·v)", {"vertex": v, "orbit": reps[v]}
                )
        return out

    # ------------------------------------------------------------------
    # actions and quotients
    # ------------------------------------------------------------------

    @staticmethod
    def check_action(graph: Graph, action: SelfSimilarAction) -> None:
        """
        Validate a self-similar action on a finite graph.

        Raises:
            ValidationException: INVALID_ACTION naming the first violated
                law instance
        """
        group = action.group
        elements = set(group.elements)
        vertices = set(graph.vertices)
        edges = {e.name: e for e in graph.edges}

        def fail(law: str, instance: str) -> ValidationException:
            logfire.error("graph.check_action failed", law=law, instance=instance)
            return ValidationException(
                message=f"self-similar action violates {law} at {instance}",
                error_code=ErrorCode.INVALID_ACTION,
                field="action",
                value=instance,
                constraint=law,
            )

        for table, known in (
            (action.vertex_action, vertices),
            (action.edge_action, set(edges)),
        ):
            for h, a, b in table:
                if h not in elements:
                    raise fail("known group elements", h)
                if a not in known or b not in known:
                    raise fail("known graph items", f"{h}: {a} -> {b}")
        for h, e, k in action.cocycle:
            if h not in elements or k not in elements or e not in edges:
                raise fail("known cocycle entries", f"{h}|_{e} = {k}")

        for h in group.elements:
            if {action.act_vertex(h, v) for v in vertices} != vertices:
                raise fail("bijective vertex action", h)
            if {action.act_edge(h, e) for e in edges} != set(edges):
                raise fail("bijective edge action", h)

        for a, b in product(group.elements, repeat=2):
            ab = group.mult(a, b)
            for v in graph.vertices:
                if action.act_vertex(ab, v) != action.act_vertex(a, action.act_vertex(b, v)):
                    raise fail("(gh)·v = g·(h·v)", f"g={a}, h={b}, v={v}")
            for name in edges:
                if action.act_edge(ab, name) != action.act_edge(a, action.act_edge(b, name)):
                    raise fail("(gh)·e = g·(h·e)", f"g={a}, h={b}, e={name}")
                left = action.restrict(ab, name)
                right = group.mult(action.restrict(a, action.act_edge(b, name)), action.restrict(b, name))
                if left != right:
                    raise fail("(gh)|_e = g|_{he} h|_e", f"g={a}, h={b}, e={name}")

        for h in group.elements:
            for name, e in edges.items():
                image = edges[action.act_edge(h, name)]
                if image.range != action.act_vertex(h, e.range):
                    raise fail("r(ge) = g·r(e)", f"g={h}, e={name}")
                if image.source != action.act_vertex(h, e.source):
                    raise fail("s(ge) = g·s(e)", f"g={h}, e={name}")
                if action.act_vertex(action.restrict(h, name), e.source) != action.act_vertex(h, e.source):
                    raise fail("g|_e·s(e) = g·s(e)", f"g={h}, e={name}")

    @staticmethod
    def orbit_representatives(graph: Graph, action: SelfSimilarAction) -> Dict[str, str]:
        """v -> first vertex of Γv in declaration order."""
        orbit_graph = nx.Graph()
        orbit_graph.add_nodes_from(graph.vertices)
        for h in action.group.elements:
            for v in graph.vertices:
                orbit_graph.add_edge(v, action.act_vertex(h, v))
        order = {v: i for i, v in enumerate(graph.vertices)}
        reps = {}
        for component in nx.connected_components(orbit_graph):
            rep = min(component, key=order.__getitem__)
            for v in component:
                reps[v] = rep
        return reps

    @staticmethod
    def _orbit_sizes(reps: Mapping[str, str]) -> Dict[str, int]:
        sizes: Dict[str, int] = {}
        for rep in reps.values():
            sizes[rep] = sizes.get(rep, 0) + 1
        return sizes

    @staticmethod
    def quotient_graph(graph: Graph, action: SelfSimilarAction) -> Graph:
        """
        The graph E/Γ.

        Vertices are orbit representatives. The edges into a class [w] are
        the edges of E into its representative w, so Θ(1_{[w]}) is the image
        of Θ(1_w) and edges swapped by elements fixing w stay distinct.
        """
        GraphService.check_action(graph, action)
        reps = GraphService.orbit_representatives(graph, action)
        vertices = tuple(v for v in graph.vertices if reps[v] == v)
        edges = tuple(
            Edge(name=e.name, source=reps[e.source], range=e.range)
            for e in graph.edges
            if reps[e.range] == e.range
        )
        quotient = Graph(vertices=vertices, edges=edges)
        if not graph.sources() and quotient.sources():
            logfire.error("graph.quotient_graph created sources", sources=quotient.sources())
            raise BaseAnalysisException(
                message=f"quotient graph has sources {quotient.sources()} although E has none",
                error_code=ErrorCode.INTERNAL_ERROR,
            )
        return quotient

    @staticmethod
    def to_quotient_element(graph: Graph, action: SelfSimilarAction, f: Element) -> Element:
        """Σ f(v)·1_v ↦ Σ f(v)·1_{[v]}."""
        GraphService.check_vertex_fn(graph, f)
        reps = GraphService.orbit_representatives(graph, action)
        out: Dict[str, int] = {}
        for v, c in f.terms:
            out[reps[v]] = out.get(reps[v], 0) + c
        return Element.of(out)

    @staticmethod
    def export_graph_presentation(graph: Graph, action: Optional[SelfSimilarAction] = None) -> MonoidPresentation:
        """
        The monoid presentation of W(Γ, E) through E/Γ.

        Generators are the quotient vertices with [w] == Σ_{r(e)=[w]} [s(e)];
        vertices receiving no edge stay free.
        """
        quotient = GraphService.quotient_graph(graph, action or SelfSimilarAction.trivial())
        feeders = GraphService._feeders(quotient)
        relations = []
        for w in quotient.vertices:
            if not feeders[w]:
                continue
            rhs = Element.of({})
            for s in feeders[w]:
                rhs = rhs + Element.generator(s)
            relations.append(Relation(lhs=Element.generator(w), rhs=rhs, kind=RelationKind.EQ))
        return MonoidPresentation(generators=quotient.vertices, relations=tuple(relations))

    # ------------------------------------------------------------------
    # cofinality and cycles
    # ------------------------------------------------------------------

    @staticmethod
    def _digraph(graph: Graph) -> nx.DiGraph:
        digraph = nx.DiGraph()
        digraph.add_nodes_from(graph.vertices)
        digraph.add_edges_from((e.source, e.range) for e in graph.edges)
        return digraph

    @staticmethod
    def is_cofinal(graph: Graph) -> Tuple[bool, Optional[CofinalityWitness]]:
        """
        Cofinality of a finite graph without sources.

        Infinite paths end in strongly connected components with a cycle,
        and their base points reach a vertex v when some path runs from the
        component to v along the edges. The check is reachability in the
        condensation.

        Returns:
            Tuple: (True, None) or (False, (component, v)) for a vertex v
            the component cannot reach
        """
        sources = graph.sources()
        if sources:
            raise sources_present(sources)
        digraph = GraphService._digraph(graph)
        condensed = nx.condensation(digraph)
        mapping = condensed.graph["mapping"]
        order = {v: i for i, v in enumerate(graph.vertices)}
        for c in nx.topological_sort(condensed):
            members = condensed.nodes[c]["members"]
            cyclic = len(members) > 1 or any(digraph.has_edge(v, v) for v in members)
            if not cyclic:
                continue
            reach = nx.descendants(condensed, c) | {c}
            for v in graph.vertices:
                if mapping[v] not in reach:
                    component = tuple(sorted(members, key=order.__getitem__))
                    logfire.info("graph.is_cofinal failed", component=component, vertex=v)
                    return False, (component, v)
        return True, None

    @staticmethod
    def _cycles(graph: Graph, cap: int) -> List[List[str]]:
        digraph = GraphService._digraph(graph)
        order = {v: i for i, v in enumerate(graph.vertices)}
        found = []
        for cycle in nx.simple_cycles(digraph):
            found.append(cycle)
            if len(found) > cap:
                raise cycle_cap_exceeded(cap)
        out = []
        for cycle in found:
            start = min(range(len(cycle)), key=lambda i: order[cycle[i]])
            out.append(cycle[start:] + cycle[:start])
        return sorted(out, key=lambda c: [order[v] for v in c])

    @staticmethod
    def cycles_with_entrance(graph: Graph, cap: Optional[int] = None) -> List[CycleInfo]:
        """
        Simple cycles, one per choice of parallel edges, with entrance flags.

        A cycle has an entrance when one of its vertices receives at least
        two edges.
        """
        cap = cap if cap is not None else analysis_config.cycle_cap
        with logfire.span("graph.cycles_with_entrance", vertices=len(graph.vertices)):
            out: List[CycleInfo] = []
            for cycle in GraphService._cycles(graph, cap):
                steps = list(zip(cycle, cycle[1:] + cycle[:1]))
                parallel = [
                    [e.name for e in graph.edges if e.source == a and e.range == b] for a, b in steps
                ]
                entrance = any(graph.in_degree(v) >= 2 for v in cycle)
                for choice in product(*parallel):
                    out.append(CycleInfo(vertices=tuple(cycle), edges=tuple(choice), has_entrance=entrance))
                    if len(out) > cap:
                        raise cycle_cap_exceeded(cap)
            return out

    @staticmethod
    def gamma_cofinal_bruteforce(
        graph: Graph, action: Optional[SelfSimilarAction] = None
    ) -> Tuple[bool, Optional[CofinalityWitness]]:
        """
        Γ-cofinality of E checked on E itself.

        Each simple cycle gives the eventually cyclic paths with the fewest
        base points; for every vertex v some base point must reach g·v for
        some g ∈ Γ along the edges.
        """
        action = action or SelfSimilarAction.trivial()
        sources = graph.sources()
        if sources:
            raise sources_present(sources)
        GraphService.check_action(graph, action)
        outgoing: Dict[str, List[str]] = {v: [] for v in graph.vertices}
        for e in graph.edges:
            outgoing[e.source].append(e.range)
        for cycle in GraphService._cycles(graph, analysis_config.cycle_cap):
            reached = set(cycle)
            queue = deque(cycle)
            while queue:
                for w in outgoing[queue.popleft()]:
                    if w not in reached:
                        reached.add(w)
                        queue.append(w)
            for v in graph.vertices:
                if not any(action.act_vertex(h, v) in reached for h in action.group.elements):
                    return False, (tuple(cycle), v)
        return True, None

    # ------------------------------------------------------------------
    # dichotomy
    # ------------------------------------------------------------------

    @staticmethod
    def _natural_certificate(
        quotient: Graph, bare: CycleInfo, budget: SearchBudget
    ) -> Tuple[Tuple[Judgement, ...], str]:
        """
        Show W ≅ ℕ for a cofinal graph with a cycle that has no entrance.

        The bare cycle is the only cyclic component, so the other vertices
        are acyclic and every vertex v is k_v·u for a cycle vertex u. Each
        v ~ k_v·u is checked in the exported presentation, then u is shown
        not to be paradoxical.
        """
        presentation = GraphService.export_graph_presentation(quotient)
        u = bare.vertices[0]
        multiples: Dict[str, int] = {w: 1 for w in bare.vertices}
        rest = GraphService._digraph(quotient).subgraph(v for v in quotient.vertices if v not in multiples)
        for v in nx.topological_sort(rest):
            multiples[v] = sum(multiples[e.source] for e in quotient.edges if e.range == v)

        unit = Element.generator(u)
        judgements = [
            MonoidService.congruent(presentation, Element.generator(v), unit.scale(multiples[v]), budget)
            for v in quotient.vertices
            if v != u
        ]
        judgements.append(MonoidService.is_paradoxical(presentation, unit, budget))
        certified = all(j.verdict == Verdict.PROVED for j in judgements[:-1]) and judgements[-1].verdict == Verdict.REFUTED
        if certified:
            spelled = ", ".join(f"{v} = {multiples[v]}·{u}" for v in quotient.vertices if v != u)
            note = f"W ≅ ℕ: {spelled or 'single vertex'}; {u} is not paradoxical, so the state {u} ↦ 1 is finite and faithful"
        else:
            logfire.warn("graph.classify_dichotomy could not certify W ≅ ℕ", vertex=u)
            note = "W ≅ ℕ is expected for a cofinal graph with a cycle without entrance, but the certificate did not close within budget"
        return tuple(judgements), note

    @staticmethod
    def classify_dichotomy(
        subject: Union[Graph, LayeredGraph],
        action: Optional[SelfSimilarAction] = None,
        depth: Optional[int] = None,
        budget: Optional[SearchBudget] = None,
    ) -> DichotomyReport:
        """
        Sort a self-similar graph into the purely infinite or the stably
        finite side, or name the precondition that fails.

        Finite graphs are classified through E/Γ: a cofinal quotient whose
        cycles all have entrances is purely infinite. Layered inputs are
        classified on their truncation to ``depth`` with a trace enclosure
        as witness.
        """
        if isinstance(subject, LayeredGraph):
            return GraphService._classify_layered(subject, depth or subject.depth)

        action = action or SelfSimilarAction.trivial()
        sources = subject.sources()
        if sources:
            raise sources_present(sources)
        start_time = time.time()
        with logfire.span("graph.classify_dichotomy", vertices=len(subject.vertices)):
            quotient = GraphService.quotient_graph(subject, action)
            cofinal, witness = GraphService.is_cofinal(quotient)
            cycles = tuple(GraphService.cycles_with_entrance(quotient))
            notes: Tuple[str, ...] = (_SIMPLICITY_NOTE,)
            report = dict(quotient=quotient, cofinal=cofinal, cofinality_witness=witness, cycles=cycles)

            if not cofinal:
                component, v = witness
                outcome = DichotomyReport(
                    **report,
                    verdict=DichotomyVerdict.NOT_APPLICABLE,
                    failed_precondition="cofinal",
                    witness=f"component {{{', '.join(component)}}} does not reach {v}",
                    notes=notes,
                )
            elif any(not c.has_entrance for c in cycles):
                bare = next(c for c in cycles if not c.has_entrance)
                certificate, natural = GraphService._natural_certificate(
                    quotient, bare, budget or SearchBudget.from_config()
                )
                outcome = DichotomyReport(
                    **report,
                    verdict=DichotomyVerdict.NOT_APPLICABLE,
                    failed_precondition="every cycle has an entrance",
                    witness=f"cycle {' '.join(bare.edges)} has no entrance",
                    natural_certificate=certificate,
                    notes=notes + (natural,),
                )
            elif cycles:
                cycle = cycles[0]
                entry = next(v for v in cycle.vertices if quotient.in_degree(v) >= 2)
                outcome = DichotomyReport(
                    **report,
                    verdict=DichotomyVerdict.PURELY_INFINITE,
                    witness=f"cycle {' '.join(cycle.edges)} has an entrance at {entry}",
                    notes=notes,
                )
            else:
                cone = GraphService.graph_trace_cone(quotient)
                trace = None
                if cone.rays:
                    trace = TraceSolution(kind=TraceKind.EXACT, values=cone.rays[0])
                outcome = DichotomyReport(
                    **report,
                    verdict=DichotomyVerdict.STABLY_FINITE if cone.nontrivial else DichotomyVerdict.NOT_APPLICABLE,
                    failed_precondition=None if cone.nontrivial else "nontrivial graph trace",
                    witness="acyclic quotient with a graph trace" if cone.nontrivial else None,
                    trace=trace,
                    notes=notes,
                )
            logfire.info(
                "graph.classify_dichotomy done",
                verdict=outcome.verdict.value,
                execution_time=round(time.time() - start_time, 4),
            )
            return outcome

    @staticmethod
    def layered_cofinal(layered: LayeredGraph) -> Tuple[bool, Optional[CofinalityWitness]]:
        """
        Cofinality of a layered truncation: every vertex above the deepest
        level is reached from every vertex of the deepest level.
        """
        graph = layered.to_graph()
        digraph = GraphService._digraph(graph)
        for deep in layered.levels[-1]:
            reach = nx.descendants(digraph, deep)
            for level in layered.levels[:-1]:
                for v in level:
                    if v not in reach:
                        return False, ((deep,), v)
        return True, None

    @staticmethod
    def _classify_layered(layered: LayeredGraph, depth: int) -> DichotomyReport:
        truncated = layered.extended(depth)
        graph = truncated.to_graph()
        with logfire.span("graph.classify_layered", depth=depth):
            cofinal, witness = GraphService.layered_cofinal(truncated)
            cycles = tuple(GraphService.cycles_with_entrance(graph))
            notes = (
                _SIMPLICITY_NOTE,
                f"layered input classified on its truncation to depth {depth}; the deepest level is a free boundary",
            )
            report = dict(quotient=graph, cofinal=cofinal, cofinality_witness=witness, cycles=cycles)
            if not cofinal:
                deep, v = witness
                return DichotomyReport(
                    **report,
                    verdict=DichotomyVerdict.NOT_APPLICABLE,
                    failed_precondition="cofinal",
                    witness=f"{deep[0]} does not reach {v}",
                    notes=notes,
                )
            if cycles:
                return DichotomyReport(
                    **report,
                    verdict=DichotomyVerdict.NOT_APPLICABLE,
                    failed_precondition="acyclic layered input",
                    witness=f"cycle {' '.join(cycles[0].edges)}",
                    notes=notes,
                )
            enclosure = DrunkenService.layered_trace_enclosure(layered, depth)
            if enclosure.infeasible_at is not None:
                return DichotomyReport(
                    **report,
                    verdict=DichotomyVerdict.NOT_APPLICABLE,
                    failed_precondition="graph trace within depth",
                    witness=f"no trace at depth {enclosure.infeasible_at}",
                    trace=enclosure,
                    notes=notes,
                )
            return DichotomyReport(
                **report,
                verdict=DichotomyVerdict.STABLY_FINITE,
                witness="nested nonempty trace enclosures at every depth",
                trace=enclosure,
                notes=notes,
            )


def _pairs_at_level(level: int) -> List[Tuple[int, int]]:
    """(p, q) with max(p, q) = level, smaller p first."""
    out = [(p, level) for p in range(level + 1)]
    out += [(level, q) for q in range(level)]
    return sorted(out)


def _positive_kernel_vector(
    equations: Sequence[Mapping[str, Fraction]], support: Sequence[str]
) -> Optional[List[Fraction]]:
    """
    The solution of the equations supported exactly on ``support``, when
    the kernel restricted to it is one-dimensional and strictly positive;
    scaled to total 1.
    """
    rows = [[eq.get(v, Fraction(0)) for v in support] for eq in equations]
    rows = [r for r in rows if any(r)]
    width = len(support)
    pivots: List[int] = []
    rank = 0
    for col in range(width):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank][col]
        rows[rank] = [x / lead for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    if width - rank != 1:
        return None
    free = next(c for c in range(width) if c not in pivots)
    vector = [Fraction(0)] * width
    vector[free] = Fraction(1)
    for i, col in enumerate(pivots):
        vector[col] = -rows[i][free]
    if all(x < 0 for x in vector):
        vector = [-x for x in vector]
    if not all(x > 0 for x in vector):
        return None
    total = sum(vector)
    return [x / total for x in vector]
