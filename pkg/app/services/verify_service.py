"""
Independent replay of the certificates behind PROVED and REFUTED verdicts.

Derivations are re-applied step by step, states are re-evaluated on every
relation, Farkas multipliers are re-summed, trace identities are rechecked
and exhaustive searches are rerun with a budget no smaller than the one
they reported.
"""

from fractions import Fraction
from typing import Callable, Dict, List, Optional, Union

import logfire

from app.exceptions import BaseAnalysisException
from app.models.graph_models import Graph, LayeredGraph, SelfSimilarAction, TraceCone, TraceKind, TraceSolution
from app.models.groupoid_models import BFunction, GroupoidModel, PartialBijection
from app.models.judgement_models import (
    BFunctionWitness,
    Claim,
    ClaimKind,
    CompositeCertificate,
    ExhaustiveSearch,
    GraphComparison,
    Judgement,
    OrbitSums,
    ReplayOutcome,
    ThetaWitness,
    TraceWitness,
    Verdict,
)
from app.models.lattice_models import Decomposition, FiniteSpace
from app.models.monoid_models import (
    BudgetReport,
    ClassEnumeration,
    Derivation,
    Element,
    FiniteMonoid,
    ModularInvariant,
    MonoidPresentation,
    RelationKind,
    SearchBudget,
    StepRule,
    TableWitness,
)
from app.models.service_response import Report
from app.models.state_models import FarkasCertificate, LPOutcome, LPStatusKind, StateVector
from app.parsers.input_parser import InputParser
from app.services.finite_monoid_service import FiniteMonoidService
from app.services.graph_service import GraphService
from app.services.groupoid_service import GroupoidService
from app.services.lattice_service import LatticeService
from app.services.search_service import SearchService
from app.services.state_service import StateService
from app.utils.linear_program import check_farkas
from app.utils.qphi import QPhi, parse_qphi
from app.utils.rationals import INF, ExtRational, evaluate, ext, ext_lt, ext_sum

Failure = Optional[str]
Subject = Union[MonoidPresentation, FiniteMonoid, GroupoidModel, Graph]

GRAPH_CLAIMS = {ClaimKind.SIM_THETA, ClaimKind.PRECSIM_GRAPH}
GROUPOID_CLAIMS = {ClaimKind.SIM_G, ClaimKind.PRECSIM_B, ClaimKind.PRECSIM_CRITERION, ClaimKind.TYPE_LEQ}


def _replay_budget(explored: int) -> SearchBudget:
    base = SearchBudget.from_config()
    return base.model_copy(update={"node_cap": max(base.node_cap, 2 * explored + 1)})


class VerifyService:
    """
    Service class for certificate replay.
    """

    @staticmethod
    def verify(judgement: Judgement, subject: Subject, action: Optional[SelfSimilarAction] = None) -> Failure:
        """
        Replay the certificate of a judgement against the input it came from.

        Args:
            judgement: Verdict with its certificate
            subject: Presentation, table, groupoid model or graph the claim is about
            action: Group action for graph claims, trivial when omitted

        Returns:
            None when the certificate supports the verdict, otherwise the
            first reason it does not
        """
        if judgement.verdict == Verdict.UNKNOWN:
            return None
        certificate = judgement.certificate
        if certificate is None:
            return "definite verdict without a certificate"
        if isinstance(certificate, BudgetReport):
            return "a budget report cannot back a definite verdict"

        claim = judgement.claim
        with logfire.span("verify.verify", claim=claim.kind.value, verdict=judgement.verdict.value):
            try:
                if isinstance(subject, FiniteMonoid):
                    failure = VerifyService._finite(claim, judgement.verdict, certificate, subject)
                elif isinstance(subject, MonoidPresentation):
                    failure = VerifyService._presentation(claim, judgement.verdict, certificate, subject)
                elif isinstance(subject, GroupoidModel):
                    failure = VerifyService._groupoid(claim, judgement.verdict, certificate, subject)
                elif isinstance(subject, Graph):
                    failure = VerifyService._graph(
                        claim, judgement.verdict, certificate, subject, action or SelfSimilarAction.trivial()
                    )
                else:
                    failure = f"no replay for claims about {type(subject).__name__}"
            except BaseAnalysisException as e:
                failure = f"replay raised {e.error_code.value}: {e.message}"
            except (KeyError, ValueError) as e:
                failure = f"certificate is malformed: {e}"
            if failure is not None:
                logfire.warn("verify.verify rejected", claim=str(claim), reason=failure)
            return failure

    # ------------------------------------------------------------------
    # presentations
    # ------------------------------------------------------------------

    @staticmethod
    def derivation(p: MonoidPresentation, d: Derivation, start: Element, end: Element) -> Failure:
        if d.start != start or d.end != end:
            return f"derivation runs {d.start} -> {d.end}, expected {start} -> {end}"
        if not SearchService.replay(p, d):
            return f"derivation {d.start} -> {d.end} does not replay"
        return None

    @staticmethod
    def state(p: MonoidPresentation, state: StateVector) -> Failure:
        values = dict(state.values)
        missing = next((g for g in p.generators if g not in values), None)
        if missing is not None:
            return f"state has no value for {missing}"
        index = state.violated_relation(p)
        if index is not None:
            return f"state violates relation {index}: {p.relations[index]}"
        return None

    @staticmethod
    def farkas(p: MonoidPresentation, certificate: FarkasCertificate) -> Failure:
        forced, _ = StateService.forced_set(p, certificate.target)
        if set(forced) != set(certificate.forced):
            return "Farkas certificate is stated over the wrong forced set"
        names, rows = StateService.state_rows(p, certificate.forced, certificate.target)
        if not check_farkas(rows, certificate.fractions(), len(names)):
            return "Farkas multipliers do not certify infeasibility"
        return None

    @staticmethod
    def _presentation(claim: Claim, verdict: Verdict, certificate, p: MonoidPresentation) -> Failure:
        kind, x, y, n = claim.kind, claim.x, claim.y, claim.n
        if kind == ClaimKind.PROPERLY_INFINITE:
            kind, x, y = ClaimKind.LEQ, x.scale(2), x

        if isinstance(certificate, Derivation):
            if verdict != Verdict.PROVED:
                return "a derivation cannot refute a claim"
            if kind == ClaimKind.LEQ:
                return VerifyService.derivation(p, certificate, x, y)
            if kind == ClaimKind.IDEAL_MEMBER and n is not None:
                return VerifyService.derivation(p, certificate, x, y.scale(n))
            if kind == ClaimKind.PARADOXICAL and n is not None:
                return VerifyService.derivation(p, certificate, x.scale(n + 1), x.scale(n))
            if kind == ClaimKind.STABLY_DOMINATED and n is not None:
                return VerifyService.derivation(p, certificate, x.scale(n + 1), y.scale(n))
            if kind == ClaimKind.CONGRUENT:
                for step in certificate.steps:
                    if step.rule != StepRule.RELATION or p.relations[step.relation_index].kind != RelationKind.EQ:
                        return "congruence derivations use equality relations only"
                return VerifyService.derivation(p, certificate, x, y)
            return f"no derivation replay for {kind.value}"

        if isinstance(certificate, StateVector):
            failure = VerifyService.state(p, certificate)
            if failure is not None:
                return failure
            values = certificate.as_dict()
            if verdict == Verdict.PROVED:
                if kind == ClaimKind.NONTRIVIAL_STATE:
                    if any(v is not INF and v > 0 for v in values.values()):
                        return None
                    return "state is trivial"
                return f"a state cannot prove {kind.value}"
            vx = certificate.evaluate(x) if x is not None else None
            vy = certificate.evaluate(y) if y is not None else None
            if kind == ClaimKind.LEQ:
                return None if ext_lt(vy, vx) else f"state gives ν(x) = {vx} <= ν(y) = {vy}"
            if kind == ClaimKind.IDEAL_MEMBER:
                return None if vy is not INF and vx is INF else "state does not separate x from the ideal of y"
            if kind == ClaimKind.PARADOXICAL:
                return None if vx is not INF and vx > 0 else f"state gives ν(x) = {vx}, not in (0, ∞)"
            if kind == ClaimKind.STABLY_DOMINATED:
                if vy is not INF and (vx is INF or (vy > 0 and vx >= vy)):
                    return None
                return f"state gives ν(x) = {vx}, ν(y) = {vy}, compatible with stable domination"
            if kind == ClaimKind.ORDER_UNIT:
                if vy is not INF and any(v is INF for v in values.values()):
                    return None
                return "state does not exhibit a generator outside the ideal of y"
            return f"no state replay for {kind.value}"

        if isinstance(certificate, ClassEnumeration):
            return VerifyService._class_enumeration(p, certificate, x, y)

        if isinstance(certificate, ModularInvariant):
            for relation in p.relations:
                if relation.kind == RelationKind.EQ and certificate.apply(relation.lhs) != certificate.apply(relation.rhs):
                    return f"invariant is not constant on {relation}"
            if certificate.apply(x) == certificate.apply(y):
                return "invariant does not separate x and y"
            return None

        if isinstance(certificate, CompositeCertificate):
            return VerifyService._presentation_composite(claim, verdict, certificate, p)

        return f"{certificate.kind} certificate does not apply to {kind.value}"

    @staticmethod
    def _class_enumeration(p: MonoidPresentation, certificate: ClassEnumeration, x: Element, y: Element) -> Failure:
        members = set(certificate.members)
        if x not in members:
            return "enumerated class does not contain x"
        if y in members:
            return "enumerated class contains y"
        rules = [rule for rule in p.rules() if p.relations[rule.relation_index].kind == RelationKind.EQ]
        for member in members:
            for rule in rules:
                if member.dominates(rule.lhs):
                    image = member.minus(rule.lhs) + rule.rhs
                    if image not in members:
                        return f"class is not closed: {member} rewrites to {image}"
        return None

    @staticmethod
    def _presentation_composite(
        claim: Claim, verdict: Verdict, certificate: CompositeCertificate, p: MonoidPresentation
    ) -> Failure:
        parts = certificate.parts
        kind = claim.kind

        if kind == ClaimKind.ORDER_UNIT and verdict == Verdict.PROVED:
            covered = set()
            for part in parts:
                if not isinstance(part, Derivation) or part.start.total() != 1:
                    return "order unit parts must be derivations from single generators"
                k = part.end.total() // max(claim.y.total(), 1)
                failure = VerifyService.derivation(p, part, part.start, claim.y.scale(k))
                if failure is not None:
                    return failure
                covered.add(part.start.support()[0])
            missing = set(p.generators) - covered
            return None if not missing else f"no derivation places {sorted(missing)[0]} below a multiple of y"

        if kind == ClaimKind.SIMPLE and verdict == Verdict.PROVED:
            null, _ = StateService.forced_set(p, Element())
            pairs = set()
            for part in parts:
                if not isinstance(part, Derivation) or part.start.total() != 1 or len(part.end.support()) != 1:
                    return "simplicity parts must be derivations h <= n·g"
                failure = VerifyService.derivation(p, part, part.start, part.end)
                if failure is not None:
                    return failure
                pairs.add((part.start.support()[0], part.end.support()[0]))
            for g in p.generators:
                if g in null:
                    continue
                for h in p.generators:
                    if (h, g) not in pairs:
                        return f"no derivation shows {h} in the ideal of {g}"
            return None

        if kind == ClaimKind.SIMPLE and verdict == Verdict.REFUTED:
            if len(parts) != 2 or not all(isinstance(s, StateVector) for s in parts):
                return "non-simplicity needs two states"
            for s in parts:
                failure = VerifyService.state(p, s)
                if failure is not None:
                    return failure
            nonzero, unit = parts[0].as_dict(), parts[1].as_dict()
            for g in p.generators:
                if nonzero[g] != 0 and unit[g] is not INF and any(v is INF for v in unit.values()):
                    return None
            return "states do not exhibit a nonzero element that fails to be an order unit"

        if kind == ClaimKind.ALMOST_UNPERFORATED and verdict == Verdict.REFUTED:
            if len(parts) != 2 or claim.n is None:
                return "perforation needs a domination and a separation"
            failure = VerifyService.derivation(p, parts[0], claim.x.scale(claim.n + 1), claim.y.scale(claim.n))
            if failure is not None:
                return failure
            return VerifyService._presentation(
                Claim(kind=ClaimKind.LEQ, x=claim.x, y=claim.y), Verdict.REFUTED, parts[1], p
            )

        if kind == ClaimKind.NONTRIVIAL_STATE and verdict == Verdict.REFUTED:
            if set(certificate.labels) != set(p.generators):
                return "every generator needs its own paradoxicality certificate"
            for g, part in zip(certificate.labels, parts):
                unit = Element.generator(g)
                if isinstance(part, FarkasCertificate):
                    if part.target != unit:
                        return f"Farkas certificate for {g} targets {part.target}"
                    failure = VerifyService.farkas(p, part)
                elif isinstance(part, Derivation):
                    m = part.end.coefficient(g)
                    failure = VerifyService.derivation(p, part, unit.scale(m + 1), unit.scale(m))
                    if failure is None and m < 1:
                        failure = f"derivation for {g} is not a paradox"
                else:
                    failure = f"{part.kind} cannot show {g} paradoxical"
                if failure is not None:
                    return failure
            return None

        return f"no composite replay for {verdict.value} {kind.value}"

    # ------------------------------------------------------------------
    # finite tables
    # ------------------------------------------------------------------

    @staticmethod
    def _finite(claim: Claim, verdict: Verdict, certificate, m: FiniteMonoid) -> Failure:
        exported = (Derivation, ModularInvariant, ClassEnumeration, FarkasCertificate)
        if claim.kind in (ClaimKind.NONTRIVIAL_STATE, ClaimKind.CONGRUENT) or isinstance(certificate, exported):
            return VerifyService._presentation(claim, verdict, certificate, FiniteMonoidService.export_finite_monoid(m))
        a = FiniteMonoidService.resolve(m, claim.x) if claim.x is not None else None
        b = FiniteMonoidService.resolve(m, claim.y) if claim.y is not None else None

        if isinstance(certificate, StateVector):
            p = FiniteMonoidService.export_finite_monoid(m)
            translated = claim.model_copy(
                update={
                    "x": FiniteMonoidService.unit(m, a) if a is not None else None,
                    "y": FiniteMonoidService.unit(m, b) if b is not None else None,
                }
            )
            return VerifyService._presentation(translated, verdict, certificate, p)

        if isinstance(certificate, CompositeCertificate):
            if claim.kind != ClaimKind.ALMOST_UNPERFORATED or verdict != Verdict.REFUTED:
                return f"no composite replay for {claim.kind.value} on tables"
            dominated, below = certificate.parts
            x, y = m.index(dominated.lhs), m.index(dominated.rhs)
            if dominated.n is None or not m.le(m.multiple(dominated.n + 1, x), m.multiple(dominated.n, y)):
                return "table does not show stable domination"
            return "table shows x <= y" if m.le(x, y) else None

        if not isinstance(certificate, TableWitness):
            return f"{certificate.kind} certificate does not apply to a table"
        if certificate.holds != (verdict == Verdict.PROVED):
            return "table witness contradicts the verdict"

        truth: Dict[ClaimKind, Callable[[], bool]] = {
            ClaimKind.LEQ: lambda: m.le(a, b),
            ClaimKind.IDEAL_MEMBER: lambda: a in FiniteMonoidService.ideal(m, b),
            ClaimKind.PARADOXICAL: lambda: FiniteMonoidService.stable_domination_multiplier(m, a, a) is not None,
            ClaimKind.PROPERLY_INFINITE: lambda: m.le(m.sum(a, a), a),
            ClaimKind.STABLY_DOMINATED: lambda: FiniteMonoidService.stable_domination_multiplier(m, a, b) is not None,
            ClaimKind.ORDER_UNIT: lambda: len(FiniteMonoidService.ideal(m, b)) == m.size,
            ClaimKind.SIMPLE: lambda: FiniteMonoidService.is_simple(m),
            ClaimKind.ALMOST_UNPERFORATED: lambda: FiniteMonoidService.is_almost_unperforated(m)[0],
        }
        if claim.kind not in truth:
            return f"no table replay for {claim.kind.value}"
        if truth[claim.kind]() != certificate.holds:
            return "the table disagrees with the witness"
        n = certificate.n
        if verdict == Verdict.PROVED and n is not None and claim.kind in (ClaimKind.PARADOXICAL, ClaimKind.STABLY_DOMINATED):
            other = a if claim.kind == ClaimKind.PARADOXICAL else b
            if not m.le(m.multiple(n + 1, a), m.multiple(n, other)):
                return f"multiplier n = {n} does not work"
        return None

    # ------------------------------------------------------------------
    # groupoids
    # ------------------------------------------------------------------

    @staticmethod
    def _need(model: GroupoidModel, claim: Claim) -> Dict[str, int]:
        """Left-hand mass the claim asks to be covered."""
        space = model.space()
        f = GroupoidService.as_lsc(model, claim.x)
        if claim.kind == ClaimKind.PRECSIM_B:
            values = LatticeService.largest_way_below(space, f).values()
        elif claim.kind == ClaimKind.PRECSIM_CRITERION:
            values = {}
            for level in GroupoidService.compact_levels(space, f):
                for x in level:
                    values[x] = values.get(x, 0) + 1
        else:
            values = GroupoidService.counts(model, claim.x)
        return {x: values.get(x, 0) for x in model.points}

    @staticmethod
    def _groupoid(claim: Claim, verdict: Verdict, certificate, model: GroupoidModel) -> Failure:
        kind = claim.kind
        if kind not in GROUPOID_CLAIMS:
            return f"{kind.value} is not a groupoid claim"
        need = VerifyService._need(model, claim)
        capacity = GroupoidService.counts(model, claim.y)

        if isinstance(certificate, BFunctionWitness):
            if verdict != Verdict.PROVED:
                return "a b-function cannot refute a claim"
            b = BFunction(terms=tuple(PartialBijection(pairs=t) for t in certificate.terms))
            known = set(model.bisections)
            stray = next((w for w in b.terms if w not in known), None)
            if stray is not None:
                return f"bisection {stray} is not in B"
            sources = {x: b.source_counts().get(x, 0) for x in model.points}
            ranges = {x: b.range_counts().get(x, 0) for x in model.points}
            if kind == ClaimKind.TYPE_LEQ:
                if certificate.slack is None:
                    return "type comparison needs its slack function"
                GroupoidService.as_lsc(model, certificate.slack)
                slack = GroupoidService.counts(model, certificate.slack)
                need = {x: need[x] + slack[x] for x in model.points}
            if kind in (ClaimKind.SIM_G, ClaimKind.TYPE_LEQ):
                if sources != need or ranges != capacity:
                    return "s_*b and r_*b do not match the two functions"
                return None
            if any(sources[x] < need[x] for x in model.points):
                return "s_*b does not cover the left-hand side"
            if any(ranges[x] > capacity[x] for x in model.points):
                return "r_*b exceeds the right-hand side"
            return None

        if isinstance(certificate, OrbitSums):
            if tuple(certificate.orbit) not in set(GroupoidService.orbits(model)):
                return f"{certificate.orbit} is not an orbit"
            left = sum(need[x] for x in certificate.orbit)
            right = sum(capacity[x] for x in certificate.orbit)
            if (left, right) != (certificate.lhs_total, certificate.rhs_total):
                return "orbit totals are misreported"
            if kind == ClaimKind.SIM_G:
                return None if left != right else "orbit totals agree"
            return None if left > right else "orbit totals do not obstruct"

        if isinstance(certificate, ExhaustiveSearch):
            budget = _replay_budget(certificate.explored)
            rerun = {
                ClaimKind.SIM_G: GroupoidService.sim_G,
                ClaimKind.PRECSIM_B: GroupoidService.precsim_B,
                ClaimKind.PRECSIM_CRITERION: GroupoidService.precsim_criterion,
                ClaimKind.TYPE_LEQ: GroupoidService.type_semigroup_leq,
            }[kind](model, claim.x, claim.y, budget)
            if rerun.verdict != Verdict.REFUTED:
                return f"rerunning the search gives {rerun.verdict.value}"
            return None

        return f"{certificate.kind} certificate does not apply to {kind.value}"

    # ------------------------------------------------------------------
    # graphs
    # ------------------------------------------------------------------

    @staticmethod
    def trace_values(graph: Graph, certificate: TraceWitness, action: SelfSimilarAction) -> Union[str, Dict[str, ExtRational]]:
        values = {v: ext(raw) for v, raw in certificate.values}
        missing = next((v for v in graph.vertices if v not in values), None)
        if missing is not None:
            return f"trace has no value at {missing}"
        if any(v is not INF and v < 0 for v in values.values()):
            return "trace takes a negative value"
        incoming: Dict[str, List[ExtRational]] = {v: [] for v in graph.vertices}
        for e in graph.edges:
            incoming[e.range].append(values[e.source])
        for v in graph.vertices:
            if values[v] != ext_sum(incoming[v]):
                return f"trace identity fails at {v}"
        for h in action.group.elements:
            for v in graph.vertices:
                if values[v] != values[action.act_vertex(h, v)]:
                    return f"trace is not invariant under {h} at {v}"
        return values

    @staticmethod
    def _graph(claim: Claim, verdict: Verdict, certificate, graph: Graph, action: SelfSimilarAction) -> Failure:
        kind = claim.kind
        if kind not in GRAPH_CLAIMS:
            return f"{kind.value} is not a graph claim"
        f, g = claim.x, claim.y

        if isinstance(certificate, ThetaWitness):
            if kind != ClaimKind.SIM_THETA or verdict != Verdict.PROVED:
                return "a Θ witness only proves ∼_Θ"
            if GraphService.theta(graph, f, certificate.p) != GraphService.theta(graph, g, certificate.q):
                return f"Θ^{certificate.p}(f) != Θ^{certificate.q}(g)"
            return None

        if isinstance(certificate, GraphComparison):
            if kind != ClaimKind.PRECSIM_GRAPH or verdict != Verdict.PROVED:
                return "a transfer plan only proves ≼"
            units: Dict[str, int] = {}
            placed = Element()
            for unit in certificate.units:
                if unit.group_element not in action.group.elements:
                    return f"unknown group element {unit.group_element}"
                units[unit.vertex] = units.get(unit.vertex, 0) + 1
                image = Element.generator(action.act_vertex(unit.group_element, unit.vertex))
                placed = placed + GraphService.theta(graph, image, unit.exponent)
            if Element.of(units) != GraphService.theta(graph, f, certificate.p):
                return "units do not add up to Θ^p(f)"
            if not GraphService.theta(graph, g, certificate.q).dominates(placed):
                return "placed units exceed Θ^q(g)"
            return None

        if isinstance(certificate, TraceWitness):
            if verdict != Verdict.REFUTED:
                return "a trace only refutes"
            trivial = SelfSimilarAction.trivial()
            values = VerifyService.trace_values(graph, certificate, action if kind == ClaimKind.PRECSIM_GRAPH else trivial)
            if isinstance(values, str):
                return values
            tf, tg = evaluate(values, f.as_dict()), evaluate(values, g.as_dict())
            if kind == ClaimKind.SIM_THETA:
                return None if tf != tg else "trace does not separate f and g"
            return None if ext_lt(tg, tf) else f"trace gives T(f) = {tf} <= T(g) = {tg}"

        return f"{certificate.kind} certificate does not apply to {kind.value}"

    # ------------------------------------------------------------------
    # payloads
    # ------------------------------------------------------------------

    @staticmethod
    def lp_outcome(p: MonoidPresentation, target: Element, outcome: LPOutcome) -> Failure:
        """Replay a find_state outcome: a normalising state, or Farkas multipliers."""
        if outcome.status == LPStatusKind.FEASIBLE:
            if outcome.state is None:
                return "feasible outcome without a state"
            failure = VerifyService.state(p, outcome.state)
            if failure is not None:
                return failure
            value = outcome.state.evaluate(target)
            return None if value == 1 else f"state gives ν(target) = {value}, not 1"
        if outcome.status == LPStatusKind.INFEASIBLE:
            if outcome.farkas is None or outcome.farkas.target != target:
                return "infeasible outcome without a matching Farkas certificate"
            return VerifyService.farkas(p, outcome.farkas)
        return None

    @staticmethod
    def trace_solution(subject: Union[Graph, LayeredGraph], solution: TraceSolution) -> Failure:
        """
        Exact traces must satisfy the trace identity wherever it is imposed
        and be positive; enclosures must nest and have lo <= hi.
        """
        if solution.kind == TraceKind.EXACT:
            if isinstance(subject, LayeredGraph):
                depth = len(solution.values) // len(subject.levels[0]) - 1
                truncated = subject.extended(depth)
                graph = truncated.to_graph()
                imposed = [v for level in truncated.levels[:-1] for v in level]
            else:
                graph, imposed = subject, list(subject.vertices)
            values = {v: parse_qphi(raw) for v, raw in solution.values}
            for v in imposed:
                total = sum((values[e.source] for e in graph.incoming(v)), QPhi(0))
                if values[v] != total:
                    return f"trace identity fails at {v}"
            negative = next((v for v, x in values.items() if x.sign() <= 0), None)
            return None if negative is None else f"trace value at {negative} is not positive"

        previous: Dict[str, tuple] = {}
        for interval in sorted(solution.intervals, key=lambda i: i.depth):
            lo = None if interval.lo is None else Fraction(interval.lo)
            hi = None if interval.hi is None else Fraction(interval.hi)
            if lo is not None and hi is not None and lo > hi:
                return f"empty interval for {interval.vertex} at depth {interval.depth}"
            if interval.vertex in previous:
                out_lo, out_hi = previous[interval.vertex]
                if (out_lo is not None and (lo is None or lo < out_lo)) or (
                    out_hi is not None and (hi is None or hi > out_hi)
                ):
                    return f"enclosure for {interval.vertex} widens at depth {interval.depth}"
            previous[interval.vertex] = (lo, hi)
        return None

    @staticmethod
    def cone_rays(graph: Graph, cone: TraceCone) -> List[Failure]:
        """Every ray is a nonzero graph trace; vertices off its support are 0."""
        out: List[Failure] = []
        for ray in cone.rays:
            values = {v: Fraction(0) for v in graph.vertices}
            values.update((v, Fraction(x)) for v, x in ray)
            if not any(values.values()) or any(x < 0 for x in values.values()):
                out.append(f"ray {dict(ray)} is not a nonzero nonnegative vector")
                continue
            out.append(GraphService.trace_violation(graph, values, boundary=cone.free_vertices))
        return out

    # ------------------------------------------------------------------
    # reports
    # ------------------------------------------------------------------

    @staticmethod
    def verify_report(report: Report) -> ReplayOutcome:
        """
        Replay everything a report asserts.

        The input is re-read and must hash to the recorded digest. The
        judgement is replayed against the subject it was computed on, and
        the payloads of ``state find``, ``graph trace``, ``lattice
        decompose``, ``lattice random-decompose`` and ``corpus run`` are
        rechecked. UNKNOWN verdicts carry nothing to replay and are counted
        as skipped.
        """
        checks: List[Failure] = []
        skipped = 0
        with logfire.span("verify.verify_report", operation=report.operation):
            if report.operation == "corpus run":
                for entry in (report.payload or {}).get("entries", []):
                    if "report" not in entry:
                        # cases expected to fail with an input error carry no report
                        checks.append(None if entry.get("match") else f"{entry.get('name', '?')}: {entry.get('verdict')}")
                        continue
                    inner = VerifyService.verify_report(Report.model_validate(entry["report"]))
                    checks.extend(f"{entry.get('name', '?')}: {f}" for f in inner.failures)
                    checks.extend([None] * (inner.checked - len(inner.failures)))
                    skipped += inner.skipped
                return VerifyService._outcome(checks, skipped)

            if report.operation == "lattice random-decompose":
                for case in (report.payload or {}).get("cases", []):
                    space = FiniteSpace.model_validate(case["space"])
                    decomposition = Decomposition.model_validate(case["decomposition"])
                    checks.append(
                        LatticeService.check_decomposition(space, case["ks"], case["vs"], decomposition)
                    )
                return VerifyService._outcome(checks, skipped)

            if report.input_path is None:
                return VerifyService._outcome(["report names no input"], skipped)
            parsed = InputParser.load(report.input_path)
            if report.input_digest is not None and parsed.digest != report.input_digest:
                return VerifyService._outcome(
                    [f"{report.input_path} changed since the report was written"], skipped
                )

            judgement = report.judgement
            if judgement is not None:
                if judgement.verdict == Verdict.UNKNOWN:
                    skipped += 1
                else:
                    kind = judgement.claim.kind
                    if kind in GRAPH_CLAIMS or kind in GROUPOID_CLAIMS:
                        subject = parsed.value
                    else:
                        subject = InputParser.monoid_subject(parsed)
                    checks.append(VerifyService.verify(judgement, subject, parsed.action))

            payload = report.payload or {}
            if report.operation == "state find" and "outcome" in payload:
                p = InputParser.monoid_subject(parsed)
                if isinstance(p, FiniteMonoid):
                    p = FiniteMonoidService.export_finite_monoid(p)
                target = InputParser.monoid_element(parsed, report.arguments["y"])
                checks.append(VerifyService.lp_outcome(p, target, LPOutcome.model_validate(payload["outcome"])))
            elif report.operation == "graph trace":
                for raw in payload.get("traces", []):
                    checks.append(VerifyService.trace_solution(parsed.value, TraceSolution.model_validate(raw)))
                if "cone" in payload:
                    checks.extend(VerifyService.cone_rays(parsed.value, TraceCone.model_validate(payload["cone"])))
            elif report.operation == "lattice decompose" and "decomposition" in payload:
                checks.append(
                    LatticeService.check_decomposition(
                        parsed.value,
                        InputParser.extra_sets(parsed, "ks"),
                        InputParser.extra_sets(parsed, "vs"),
                        Decomposition.model_validate(payload["decomposition"]),
                    )
                )
            return VerifyService._outcome(checks, skipped)

    @staticmethod
    def _outcome(checks: List[Failure], skipped: int) -> ReplayOutcome:
        failures = tuple(f for f in checks if f is not None)
        if failures:
            logfire.warn("verify.verify_report rejected", failures=list(failures))
        else:
            logfire.info("verify.verify_report accepted", checked=len(checks), skipped=skipped)
        return ReplayOutcome(accepted=not failures, checked=len(checks), skipped=skipped, failures=failures)
