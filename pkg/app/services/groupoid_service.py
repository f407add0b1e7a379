"""
Finite ample groupoid models: inverse semigroups of partial bijections on a
finite point set, their type semigroups and the dynamics around them.

Functions on the unit space are ``Element`` values keyed by point names,
so f = 2·1_{1} + 1_{2} is ``Element.of({"1": 2, "2": 1})``.
"""

import time
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import logfire
import networkx as nx

from app.config.analysis_config import analysis_config
from app.exceptions import ValidationException, closure_cap_exceeded
from app.models.error_models import ErrorCode
from app.models.groupoid_models import (
    BFunction,
    GroupoidModel,
    InvariantStructure,
    InvariantSubset,
    PartialBijection,
    SigmaValues,
    StabilizedModel,
    WeightCone,
    open_generator_name,
)
from app.models.judgement_models import (
    BFunctionWitness,
    Claim,
    ClaimKind,
    ExhaustiveSearch,
    Judgement,
    OrbitSums,
    Verdict,
)
from app.models.lattice_models import FiniteSpace, LscFn, PointSet, as_points
from app.models.monoid_models import (
    BudgetReport,
    Element,
    MonoidPresentation,
    Relation,
    RelationKind,
    SearchBudget,
)
from app.models.state_models import StateVector
from app.services.lattice_service import LatticeService
from app.services.monoid_service import MonoidService
from app.services.state_service import StateService

Counts = Dict[str, int]


class _NodeCapReached(Exception):
    pass


def _bisection_key(w: PartialBijection):
    return (len(w.pairs), w.pairs)


class GroupoidService:
    """
    Service class for finite groupoid models and their type semigroups
    """

    @staticmethod
    def close_inverse_semigroup(
        points: Iterable[str],
        generators: Sequence[PartialBijection],
        names: Optional[Sequence[str]] = None,
        cap: Optional[int] = None,
    ) -> GroupoidModel:
        """
        Build the model generated by some partial bijections.

        O is the ∪/∩-closure of the domains that occur, and B is closed under
        composition, inverses and the identities on members of O.

        Raises:
            ValidationException: If a generator moves points outside X
            BudgetExceededException: If B grows past ``cap``
        """
        cap = cap or analysis_config.closure_cap
        pts = as_points(points)
        universe = set(pts)
        names = tuple(names) if names is not None else tuple(f"w{i + 1}" for i in range(len(generators)))
        if len(names) != len(generators):
            raise ValidationException(
                message="one name per generator is required",
                error_code=ErrorCode.INVALID_ACTION,
                field="names",
                value=list(names),
            )
        for name, w in zip(names, generators):
            outside = (w.dom() | w.ran()) - universe
            if outside:
                raise ValidationException(
                    message=f"generator {name} moves points outside X",
                    error_code=ErrorCode.INVALID_ACTION,
                    field=name,
                    value=sorted(outside),
                    constraint=f"points in {sorted(universe)}",
                )

        start_time = time.time()
        with logfire.span("groupoid.close_inverse_semigroup", points=len(pts), generators=len(generators)):
            semigroup: Set[PartialBijection] = {PartialBijection()}
            semigroup |= set(generators) | {w.inverse() for w in generators}
            opens: Set[FrozenSet[str]] = {frozenset()}
            while True:
                domains = {w.dom() for w in semigroup}
                space = FiniteSpace.generated_by(pts, opens | domains)
                lattice = set(space.open_sets())
                semigroup |= {PartialBijection.identity(u) for u in lattice}

                frontier = list(semigroup)
                while frontier:
                    fresh = []
                    members = list(semigroup)
                    for a in frontier:
                        for b in members:
                            for composite in (a.after(b), b.after(a)):
                                if composite not in semigroup:
                                    semigroup.add(composite)
                                    fresh.append(composite)
                                    if len(semigroup) > cap:
                                        logfire.error("groupoid.close_inverse_semigroup cap exceeded", cap=cap)
                                        raise closure_cap_exceeded(cap, len(semigroup))
                    frontier = fresh

                if lattice == opens and all(w.dom() in lattice for w in semigroup):
                    break
                opens = lattice

            logfire.info(
                "groupoid.close_inverse_semigroup done",
                bisections=len(semigroup),
                opens=len(opens),
                execution_time=round(time.time() - start_time, 4),
            )
            return GroupoidModel(
                points=pts,
                generator_names=names,
                generators=tuple(generators),
                bisections=tuple(sorted(semigroup, key=_bisection_key)),
                opens=space.opens,
            )

    @staticmethod
    def counts(model: GroupoidModel, f: Element) -> Counts:
        """Point → multiplicity map of f, zero-filled over X."""
        out = {x: 0 for x in model.points}
        for name, c in f.terms:
            if name not in out:
                raise ValidationException(
                    message=f"'{name}' is not a point of the model",
                    error_code=ErrorCode.INVALID_INPUT,
                    field="function",
                    value=name,
                    constraint=f"one of {', '.join(model.points)}",
                )
            out[name] = c
        return out

    @staticmethod
    def as_lsc(model: GroupoidModel, f: Element) -> LscFn:
        """f as a member of F(O); fails when a level set is not in O."""
        return LatticeService.from_values(model.space(), GroupoidService.counts(model, f))

    @staticmethod
    def from_lsc(f: LscFn) -> Element:
        return Element.of(f.values())

    @staticmethod
    def _check_terms(model: GroupoidModel, b: BFunction) -> None:
        known = set(model.bisections)
        for w in b.terms:
            if w not in known:
                raise ValidationException(
                    message=f"bisection {w} is not in B",
                    error_code=ErrorCode.INVALID_ACTION,
                    field="b",
                    value=str(w),
                )

    @staticmethod
    def s_star(model: GroupoidModel, b: BFunction) -> LscFn:
        GroupoidService._check_terms(model, b)
        return LatticeService.from_values(model.space(), b.source_counts())

    @staticmethod
    def r_star(model: GroupoidModel, b: BFunction) -> LscFn:
        GroupoidService._check_terms(model, b)
        return LatticeService.from_values(model.space(), b.range_counts())

    @staticmethod
    def orbits(model: GroupoidModel) -> List[PointSet]:
        graph = nx.Graph()
        graph.add_nodes_from(model.points)
        for w in model.bisections:
            graph.add_edges_from(w.pairs)
        return sorted(as_points(c) for c in nx.connected_components(graph))

    @staticmethod
    def sigma_map(model: GroupoidModel, f: Element) -> SigmaValues:
        """Σf: the total mass of f on each orbit."""
        values = GroupoidService.counts(model, f)
        orbits = GroupoidService.orbits(model)
        return SigmaValues(orbits=tuple(orbits), totals=tuple(sum(values[x] for x in o) for o in orbits))

    @staticmethod
    def _orbit_excess(model: GroupoidModel, lhs: Counts, rhs: Counts, exact: bool) -> Optional[OrbitSums]:
        for orbit in GroupoidService.orbits(model):
            left = sum(lhs.get(x, 0) for x in orbit)
            right = sum(rhs.get(x, 0) for x in orbit)
            if left > right or (exact and left != right):
                return OrbitSums(orbit=orbit, lhs_total=left, rhs_total=right)
        return None

    @staticmethod
    def _search_b(
        model: GroupoidModel, need: Counts, capacity: Counts, exact: bool, budget: SearchBudget
    ) -> Tuple[Optional[List[PartialBijection]], int]:
        """
        Multiset b of bisections with s_*b = need and r_*b = capacity (exact),
        or s_*b >= need and r_*b <= capacity.

        Raises:
            _NodeCapReached: When more than ``budget.node_cap`` states are expanded
        """
        terms = [w for w in model.bisections if not w.is_empty()]
        points = model.points
        failed: Set[Tuple[int, ...]] = set()
        nodes = 0

        def solve(n: Counts, c: Counts) -> Optional[List[PartialBijection]]:
            nonlocal nodes
            x = next((p for p in points if n[p] > 0), None)
            if x is None:
                if exact and any(c.values()):
                    return None
                return []
            key = tuple(n[p] for p in points) + tuple(c[p] for p in points)
            if key in failed:
                return None
            nodes += 1
            if nodes > budget.node_cap:
                raise _NodeCapReached(nodes)
            for w in terms:
                dom = w.dom()
                if x not in dom:
                    continue
                if exact and any(n[s] < 1 for s in dom):
                    continue
                if any(c[t] < 1 for t in w.ran()):
                    continue
                n2 = dict(n)
                for s in dom:
                    n2[s] = max(0, n2[s] - 1)
                c2 = dict(c)
                for t in w.ran():
                    c2[t] -= 1
                rest = solve(n2, c2)
                if rest is not None:
                    return [w] + rest
            failed.add(key)
            return None

        found = solve(dict(need), dict(capacity))
        return found, nodes

    @staticmethod
    def _matching_judgement(
        claim: Claim,
        model: GroupoidModel,
        need: Counts,
        capacity: Counts,
        exact: bool,
        budget: SearchBudget,
        method: str,
    ) -> Judgement:
        try:
            found, nodes = GroupoidService._search_b(model, need, capacity, exact, budget)
        except _NodeCapReached as e:
            logfire.warn("groupoid search budget exhausted", method=method, nodes=e.args[0])
            return Judgement(
                claim=claim,
                verdict=Verdict.UNKNOWN,
                certificate=BudgetReport.for_budget(budget, nodes_explored=e.args[0], pruned=True, reason="node cap"),
            )
        if found is not None:
            return Judgement(
                claim=claim,
                verdict=Verdict.PROVED,
                certificate=BFunctionWitness(terms=tuple(w.pairs for w in found)),
            )
        return Judgement(
            claim=claim,
            verdict=Verdict.REFUTED,
            certificate=ExhaustiveSearch(method=method, explored=nodes),
        )

    @staticmethod
    def sim_G(model: GroupoidModel, f: Element, g: Element, budget: SearchBudget) -> Judgement:
        """
        Decide f ∼_G g: some b ∈ F(B) has s_*b = f and r_*b = g.

        Returns:
            Judgement: PROVED with b, REFUTED by unequal orbit sums or an
            exhausted matching search, UNKNOWN when the node cap is hit
        """
        claim = Claim(kind=ClaimKind.SIM_G, x=f, y=g)
        fc = GroupoidService.counts(model, f)
        gc = GroupoidService.counts(model, g)
        with logfire.span("groupoid.sim_G", f=str(f), g=str(g)):
            sums = GroupoidService._orbit_excess(model, fc, gc, exact=True)
            if sums is not None:
                return Judgement(claim=claim, verdict=Verdict.REFUTED, certificate=sums)
            return GroupoidService._matching_judgement(claim, model, fc, gc, True, budget, "unit matching")

    @staticmethod
    def precsim_B(model: GroupoidModel, f: Element, g: Element, budget: SearchBudget) -> Judgement:
        """
        Decide f ≼_B g: every k ≪ f has some b with k <= s_*b and r_*b <= g.

        The k ≪ f have a largest member k*, so one covering search for k*
        settles the quantifier.
        """
        claim = Claim(kind=ClaimKind.PRECSIM_B, x=f, y=g)
        space = model.space()
        f_lsc = GroupoidService.as_lsc(model, f)
        GroupoidService.as_lsc(model, g)
        top = LatticeService.largest_way_below(space, f_lsc)
        need = {x: top.value(x) for x in model.points}
        capacity = GroupoidService.counts(model, g)
        notes: Tuple[str, ...] = ()
        if top != f_lsc:
            notes = (f"largest k ≪ f is {top}",)
        with logfire.span("groupoid.precsim_B", f=str(f), g=str(g)):
            sums = GroupoidService._orbit_excess(model, need, capacity, exact=False)
            if sums is not None:
                return Judgement(claim=claim, verdict=Verdict.REFUTED, certificate=sums, notes=notes)
            judgement = GroupoidService._matching_judgement(
                claim, model, need, capacity, False, budget, "covering search"
            )
            return judgement.with_notes(*notes)

    @staticmethod
    def compact_levels(space: FiniteSpace, f: LscFn) -> List[FrozenSet[str]]:
        """Largest member of O with closure inside each level set of f."""
        out = []
        for level in f.chain:
            inner: FrozenSet[str] = frozenset()
            for u in space.open_sets():
                if space.closure(u) <= set(level):
                    inner |= u
            out.append(inner)
        return out

    @staticmethod
    def precsim_criterion(model: GroupoidModel, f: Element, g: Element, budget: SearchBudget) -> Judgement:
        """
        Decide f ≼_B g by the covering criterion.

        With f = Σ 1_{U_i} and g = Σ 1_{V_j} in normal form, look for
        bisections B_a labelled (i, j) whose sources cover K_i ⊆ U_i and
        whose ranges sit disjointly inside V_j.
        """
        claim = Claim(kind=ClaimKind.PRECSIM_CRITERION, x=f, y=g)
        space = model.space()
        us = GroupoidService.compact_levels(space, GroupoidService.as_lsc(model, f))
        vs = [frozenset(v) for v in GroupoidService.as_lsc(model, g).chain]
        tasks = [(i, x) for i, k in enumerate(us) for x in sorted(k)]
        terms = [w for w in model.bisections if not w.is_empty()]
        failed: Set[Tuple[FrozenSet[Tuple[int, str]], Tuple[FrozenSet[str], ...]]] = set()
        nodes = 0

        def solve(covered: FrozenSet[Tuple[int, str]], used: Tuple[FrozenSet[str], ...]):
            nonlocal nodes
            task = next((t for t in tasks if t not in covered), None)
            if task is None:
                return []
            key = (covered, used)
            if key in failed:
                return None
            nodes += 1
            if nodes > budget.node_cap:
                raise _NodeCapReached(nodes)
            i, x = task
            for w in terms:
                if x not in w.dom():
                    continue
                ran = w.ran()
                for j, v in enumerate(vs):
                    if not ran <= v or ran & used[j]:
                        continue
                    gained = covered | {(i, y) for y in w.dom() & us[i]}
                    placed = used[:j] + (used[j] | ran,) + used[j + 1 :]
                    rest = solve(frozenset(gained), placed)
                    if rest is not None:
                        return [(w, i, j)] + rest
            failed.add(key)
            return None

        with logfire.span("groupoid.precsim_criterion", f=str(f), g=str(g)):
            try:
                found = solve(frozenset(), tuple(frozenset() for _ in vs))
            except _NodeCapReached as e:
                logfire.warn("groupoid.precsim_criterion budget exhausted", nodes=e.args[0])
                return Judgement(
                    claim=claim,
                    verdict=Verdict.UNKNOWN,
                    certificate=BudgetReport.for_budget(budget, nodes_explored=e.args[0], pruned=True, reason="node cap"),
                )
            if found is None:
                return Judgement(
                    claim=claim,
                    verdict=Verdict.REFUTED,
                    certificate=ExhaustiveSearch(method="labelled covering", explored=nodes),
                )
            return Judgement(
                claim=claim,
                verdict=Verdict.PROVED,
                certificate=BFunctionWitness(terms=tuple(w.pairs for w, _, _ in found)),
                notes=tuple(f"{w} : K_{i + 1} -> V_{j + 1}" for w, i, j in found),
            )

    @staticmethod
    def _compositions(points: Sequence[str], total: int) -> Iterator[Counts]:
        if not points:
            if total == 0:
                yield {}
            return
        head, rest = points[0], points[1:]
        for c in range(total, -1, -1):
            for tail in GroupoidService._compositions(rest, total - c):
                yield {head: c, **tail}

    @staticmethod
    def type_semigroup_leq(
        model: GroupoidModel,
        f: Element,
        g: Element,
        budget: SearchBudget,
        mass_cap: Optional[int] = None,
    ) -> Judgement:
        """
        Decide [f] <= [g] in S(G): f + h ∼_G g for some h ∈ F(O).

        ∼_G preserves orbit sums, so h has prescribed mass on every orbit
        and the slack candidates form a finite list.
        """
        claim = Claim(kind=ClaimKind.TYPE_LEQ, x=f, y=g)
        space = model.space()
        GroupoidService.as_lsc(model, f)
        GroupoidService.as_lsc(model, g)
        fc = GroupoidService.counts(model, f)
        gc = GroupoidService.counts(model, g)

        with logfire.span("groupoid.type_semigroup_leq", f=str(f), g=str(g)):
            sums = GroupoidService._orbit_excess(model, fc, gc, exact=False)
            if sums is not None:
                return Judgement(claim=claim, verdict=Verdict.REFUTED, certificate=sums)

            slack_mass = sum(gc.values()) - sum(fc.values())
            if mass_cap is not None and slack_mass > mass_cap:
                return Judgement(
                    claim=claim,
                    verdict=Verdict.UNKNOWN,
                    notes=(f"slack mass {slack_mass} exceeds cap {mass_cap}",),
                )

            per_orbit = []
            for orbit in GroupoidService.orbits(model):
                gap = sum(gc[x] for x in orbit) - sum(fc[x] for x in orbit)
                per_orbit.append(list(GroupoidService._compositions(list(orbit), gap)))

            explored = 0
            undecided = False

            def candidates(index: int, partial: Counts) -> Iterator[Counts]:
                if index == len(per_orbit):
                    yield partial
                    return
                for piece in per_orbit[index]:
                    yield from candidates(index + 1, {**partial, **piece})

            for h in candidates(0, {}):
                levels = range(1, max(h.values(), default=0) + 1)
                if not all(space.is_open([x for x, v in h.items() if v >= k]) for k in levels):
                    continue
                explored += 1
                slack = Element.of(h)
                verdict = GroupoidService.sim_G(model, f + slack, g, budget)
                if verdict.verdict == Verdict.PROVED:
                    logfire.info("groupoid.type_semigroup_leq proved", slack=str(slack))
                    return Judgement(
                        claim=claim,
                        verdict=Verdict.PROVED,
                        certificate=verdict.certificate.model_copy(update={"slack": slack}),
                    )
                if verdict.verdict == Verdict.UNKNOWN:
                    undecided = True

            if undecided:
                return Judgement(
                    claim=claim,
                    verdict=Verdict.UNKNOWN,
                    notes=("some slack candidates hit the node cap",),
                )
            return Judgement(
                claim=claim,
                verdict=Verdict.REFUTED,
                certificate=ExhaustiveSearch(method="slack enumeration", explored=explored),
            )

    @staticmethod
    def export_presentation(model: GroupoidModel) -> MonoidPresentation:
        """
        Present the type semigroup: one generator 1_U per nonempty U ∈ O,
        1_U + 1_V = 1_{U∪V} + 1_{U∩V} for incomparable U, V, and
        1_{s(W)} = 1_{r(W)} for every W ∈ B.
        """
        opens = model.nonempty_opens()
        names = tuple(open_generator_name(u) for u in opens)

        def one(u: Iterable[str]) -> Element:
            u = as_points(u)
            return Element.generator(open_generator_name(u)) if u else Element()

        relations: List[Relation] = []
        for u, v in combinations(opens, 2):
            su, sv = set(u), set(v)
            if su <= sv or sv <= su:
                continue
            relations.append(
                Relation(lhs=one(u) + one(v), rhs=one(su | sv) + one(su & sv), kind=RelationKind.EQ)
            )
        seen: Set[Tuple[PointSet, PointSet]] = set()
        for w in model.bisections:
            s, r = as_points(w.dom()), as_points(w.ran())
            if not s or s == r:
                continue
            key = (min(s, r), max(s, r))
            if key in seen:
                continue
            seen.add(key)
            relations.append(Relation(lhs=one(key[0]), rhs=one(key[1]), kind=RelationKind.EQ))
        logfire.info("groupoid.export_presentation", generators=len(names), relations=len(relations))
        return MonoidPresentation(generators=names, relations=tuple(relations))

    @staticmethod
    def to_presentation_element(model: GroupoidModel, f: Element) -> Element:
        """The exported element Σ 1_{U_k} over the normal-form chain of f."""
        chain = GroupoidService.as_lsc(model, f).chain
        out = Element()
        for level in chain:
            out = out + Element.generator(open_generator_name(level))
        return out

    @staticmethod
    def presentation_ideals(
        presentation: MonoidPresentation, budget: SearchBudget, cap: Optional[int] = None
    ) -> Tuple[List[Tuple[str, ...]], bool]:
        """
        Ideals of a presentation, each named by the generators it contains.

        An ideal is hereditary, so it is the ideal generated by the sum of
        its generators. Every ideal arises from ∅ by repeatedly adjoining
        one generator and closing under membership in the generated ideal.

        Returns:
            (ideals, saturated): saturated is False when ``cap`` closures were
            computed before the search ended or a membership came back UNKNOWN
        """
        cap = cap or analysis_config.closure_cap
        generators = presentation.generators
        saturated = True

        def close(chosen: FrozenSet[str]) -> FrozenSet[str]:
            nonlocal saturated
            total = Element.of({g: 1 for g in chosen})
            members = set(chosen)
            for g in generators:
                if g in members:
                    continue
                verdict = MonoidService.ideal_membership(presentation, Element.generator(g), total, budget).verdict
                if verdict == Verdict.PROVED:
                    members.add(g)
                elif verdict == Verdict.UNKNOWN:
                    saturated = False
            return frozenset(members)

        found: Dict[FrozenSet[str], None] = {frozenset(): None}
        frontier = [frozenset()]
        closures = 0
        while frontier:
            fresh = []
            for ideal in frontier:
                for g in generators:
                    if g in ideal:
                        continue
                    if closures >= cap:
                        logfire.warn("groupoid.presentation_ideals cap reached", cap=cap, ideals=len(found))
                        return [tuple(sorted(i, key=generators.index)) for i in found], False
                    closures += 1
                    grown = close(ideal | {g})
                    if grown not in found:
                        found[grown] = None
                        fresh.append(grown)
            frontier = fresh
        ordered = [tuple(sorted(i, key=generators.index)) for i in found]
        logfire.info("groupoid.presentation_ideals", ideals=len(ordered), closures=closures, saturated=saturated)
        return ordered, saturated

    @staticmethod
    def invariant_subsets_and_ideals(model: GroupoidModel, budget: SearchBudget) -> InvariantStructure:
        """
        Unions of orbits and whether each is open, next to the ideals of the
        exported presentation enumerated on their own. When the enumeration
        is complete the two counts are compared.
        """
        space = model.space()
        orbits = GroupoidService.orbits(model)
        with logfire.span("groupoid.invariant_subsets_and_ideals", orbits=len(orbits)):
            subsets = []
            for r in range(len(orbits) + 1):
                for chosen in combinations(orbits, r):
                    points = as_points(x for orbit in chosen for x in orbit)
                    is_open = space.is_open(points)
                    gens: Tuple[str, ...] = ()
                    if is_open:
                        gens = tuple(
                            open_generator_name(v) for v in model.nonempty_opens() if set(v) <= set(points)
                        )
                    subsets.append(InvariantSubset(points=points, is_open=is_open, ideal_generators=gens))

            everything = as_points(model.points)
            minimal = all(s.points in ((), everything) for s in subsets if s.is_open)
            presentation = GroupoidService.export_presentation(model)
            ideals, saturated = GroupoidService.presentation_ideals(presentation, budget)
            matches = None
            if saturated:
                matches = len(ideals) == sum(1 for s in subsets if s.is_open)
                if not matches:
                    logfire.warn(
                        "groupoid ideals and invariant opens differ",
                        ideals=len(ideals),
                        invariant_opens=sum(1 for s in subsets if s.is_open),
                    )
            simple_verdict = None
            if presentation.generators:
                simple_verdict = MonoidService.is_simple(presentation, budget).verdict.value
            return InvariantStructure(
                orbits=tuple(orbits),
                invariant_opens=tuple(subsets),
                ideals=tuple(ideals),
                ideal_enumeration_saturated=saturated,
                ideals_match_invariant_opens=matches,
                minimal=minimal,
                simple_verdict=simple_verdict,
            )

    @staticmethod
    def stabilize(model: GroupoidModel, n: int) -> StabilizedModel:
        """
        The model on X × {1..n}.

        B is already closed, so its matrix amplification is too: each w ∈ B
        and each pair of copies (j, i) give (s, j) ↦ (t, i) for (s, t) ∈ w.
        The opens are the products ⋃_i U_i × {i}.
        """
        if n < 1:
            raise ValidationException(
                message="stabilisation needs n >= 1",
                error_code=ErrorCode.INVALID_INPUT,
                field="n",
                value=n,
                constraint=">= 1",
            )

        def lift(x: str, i: int) -> str:
            return f"{x}.{i}"

        copies = range(1, n + 1)
        start_time = time.time()
        with logfire.span("groupoid.stabilize", n=n, bisections=len(model.bisections)):
            bisections = {
                PartialBijection(pairs=tuple((lift(s, j), lift(t, i)) for s, t in w.pairs))
                for w in model.bisections
                for i in copies
                for j in copies
            }
            opens = {
                as_points(lift(x, i) for i, u in zip(copies, layers) for x in u)
                for layers in product(model.opens, repeat=n)
            }
            generators = [
                PartialBijection(pairs=tuple((lift(s, 1), lift(t, 1)) for s, t in w.pairs))
                for w in model.generators
            ]
            names = list(model.generator_names)
            top = frozenset().union(*(frozenset(u) for u in model.opens))
            if top:
                for i in range(2, n + 1):
                    generators.append(PartialBijection(pairs=tuple((lift(x, 1), lift(x, i)) for x in sorted(top))))
                    names.append(f"e_{i}_1")
            stabilized = GroupoidModel(
                points=as_points(lift(x, i) for i in copies for x in model.points),
                generator_names=tuple(names),
                generators=tuple(generators),
                bisections=tuple(sorted(bisections, key=_bisection_key)),
                opens=tuple(sorted(opens, key=lambda u: (len(u), u))),
            )
            logfire.info(
                "groupoid.stabilize done",
                bisections=len(stabilized.bisections),
                opens=len(stabilized.opens),
                execution_time=round(time.time() - start_time, 4),
            )
        return StabilizedModel(model=stabilized, n=n, forward=tuple((x, lift(x, 1)) for x in model.points))

    @staticmethod
    def restrict_to_invariant(model: GroupoidModel, u: Iterable[str]) -> GroupoidModel:
        """
        The model on X ∖ U for an invariant open U.

        Raises:
            ValidationException: If U is not open or not a union of orbits
        """
        removed = frozenset(u)
        unknown = removed - set(model.points)
        if unknown:
            raise ValidationException(
                message="U contains points outside the model",
                error_code=ErrorCode.NOT_INVARIANT,
                field="U",
                value=sorted(unknown),
            )
        if not model.space().is_open(removed):
            raise ValidationException(
                message=f"U = {sorted(removed)} is not open",
                error_code=ErrorCode.NOT_INVARIANT,
                field="U",
                value=sorted(removed),
                constraint="member of O",
            )
        for orbit in GroupoidService.orbits(model):
            if removed & set(orbit) and not set(orbit) <= removed:
                raise ValidationException(
                    message=f"U = {sorted(removed)} cuts the orbit {list(orbit)}",
                    error_code=ErrorCode.NOT_INVARIANT,
                    field="U",
                    value=sorted(removed),
                    constraint="union of orbits",
                )
        rest = [x for x in model.points if x not in removed]
        generators = [w.restrict(rest) for w in model.generators]
        return GroupoidService.close_inverse_semigroup(rest, generators, model.generator_names)

    @staticmethod
    def invariant_weight_cone(model: GroupoidModel, budget: Optional[SearchBudget] = None) -> WeightCone:
        """
        Invariant weights are the orbit-constant ones; each orbit indicator
        is checked to induce a state of the exported presentation, and an LP
        state is checked to be orbit-constant on singleton opens.
        """
        orbits = GroupoidService.orbits(model)
        presentation = GroupoidService.export_presentation(model)
        rays = tuple(tuple((x, 1) for x in orbit) for orbit in orbits)

        def induced(weights: Dict[str, int]) -> StateVector:
            return StateVector.of(
                {
                    open_generator_name(u): Fraction(sum(weights.get(x, 0) for x in u))
                    for u in model.nonempty_opens()
                }
            )

        with logfire.span("groupoid.invariant_weight_cone", orbits=len(orbits)):
            rays_ok = all(induced(dict(ray)).violated_relation(presentation) is None for ray in rays)
            lp_state = None
            constant = None
            if presentation.generators:
                y = Element.of({g: 1 for g in presentation.generators})
                outcome = StateService.find_state(presentation, y, budget)
                lp_state = outcome.state
                if lp_state is not None:
                    constant = True
                    values = lp_state.as_dict()
                    for orbit in orbits:
                        seen = {
                            values[open_generator_name((x,))]
                            for x in orbit
                            if open_generator_name((x,)) in values
                        }
                        if len(seen) > 1:
                            constant = False
            if not rays_ok:
                logfire.error("groupoid.invariant_weight_cone orbit weight violates a relation")
            return WeightCone(
                orbits=tuple(orbits),
                rays=rays,
                rays_induce_states=rays_ok,
                lp_state=lp_state,
                lp_state_orbit_constant=constant,
            )

    @staticmethod
    def check_almost_unperforation_bounded(model: GroupoidModel, budget: SearchBudget) -> Judgement:
        """Dynamical comparison surrogate: bounded perforation search on the exported monoid."""
        presentation = GroupoidService.export_presentation(model)
        with logfire.span("groupoid.check_almost_unperforation_bounded"):
            return MonoidService.check_almost_unperforated(presentation, budget)
