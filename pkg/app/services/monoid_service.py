"""
Decision procedures for presented (and tabulated) preordered monoids.

Presentation answers are three-valued: PROVED carries a replayable
derivation, REFUTED carries a state (or another exact invariant), and
UNKNOWN carries the report of the exhausted search. Tabulated monoids are
handed to ``FiniteMonoidService`` and always receive a definite answer.
"""

import time
from itertools import product
from typing import List, Sequence, Union

import logfire

from app.exceptions import ValidationException, undeclared_generator, zero_element
from app.models.error_models import ErrorCode
from app.models.judgement_models import Claim, ClaimKind, Judgement, Verdict, composite
from app.models.monoid_models import (
    ClassEnumeration,
    Element,
    FiniteMonoid,
    MonoidPresentation,
    Relation,
    RelationKind,
    SearchBudget,
    TableWitness,
)
from app.models.state_models import LPStatusKind
from app.services.finite_monoid_service import FiniteMonoidService
from app.services.search_service import SearchService
from app.services.state_service import StateService
from app.services.tarski_service import TarskiService

MonoidInput = Union[MonoidPresentation, FiniteMonoid]


def _declared(p: MonoidPresentation, *elements: Element) -> None:
    for element in elements:
        missing = p.undeclared(element)
        if missing is not None:
            raise undeclared_generator(missing, list(p.generators))


class MonoidService:
    """
    Service class for the preorder and the paradoxicality predicates.
    """

    @staticmethod
    def leq(p: MonoidInput, x: Element, y: Element, budget: SearchBudget) -> Judgement:
        """
        Decide x <= y.

        Returns:
            Judgement: PROVED with a derivation, REFUTED with a state ν such
            that ν(x) > ν(y), UNKNOWN with the exhausted search report
        """
        if isinstance(p, FiniteMonoid):
            return FiniteMonoidService.leq(p, x, y)
        _declared(p, x, y)
        start_time = time.time()
        claim = Claim(kind=ClaimKind.LEQ, x=x, y=y)
        with logfire.span("monoid.leq", x=str(x), y=str(y), node_cap=budget.node_cap):
            outcome = SearchService.leq_search(p, x, y, budget)
            if outcome.derivation is not None:
                logfire.info("monoid.leq proved", steps=len(outcome.derivation.steps))
                return Judgement(claim=claim, verdict=Verdict.PROVED, certificate=outcome.derivation)

            forced, _ = StateService.forced_set(p, y)
            if any(g not in forced for g in x.support()):
                logfire.info("monoid.leq refuted", reason="x outside the ideal of y")
                return Judgement(
                    claim=claim,
                    verdict=Verdict.REFUTED,
                    certificate=StateService.zero_infinity_state(p, forced),
                )

            if not y.is_zero():
                sup = StateService.sup_state_value(p, x, y)
                if sup.status == LPStatusKind.FEASIBLE and sup.optimum_value > 1:
                    logfire.info("monoid.leq refuted", optimum=sup.optimum)
                    return Judgement(
                        claim=claim,
                        verdict=Verdict.REFUTED,
                        certificate=sup.state,
                        notes=(f"max ν(x) subject to ν(y) = 1 is {sup.optimum}",),
                    )

            logfire.warn(
                "monoid.leq budget exhausted",
                nodes=outcome.report.nodes_explored,
                execution_time=round(time.time() - start_time, 4),
            )
            notes = ()
            if outcome.report.saturated:
                notes = ("backward closure saturated without reaching x; states cannot separate the pair",)
            return Judgement(claim=claim, verdict=Verdict.UNKNOWN, certificate=outcome.report, notes=notes)

    @staticmethod
    def ideal_membership(p: MonoidInput, x: Element, y: Element, budget: SearchBudget) -> Judgement:
        """Decide x ∈ ⟨y⟩, i.e. x <= n·y for some n."""
        if isinstance(p, FiniteMonoid):
            a, b = FiniteMonoidService.resolve(p, x), FiniteMonoidService.resolve(p, y)
            holds = a in FiniteMonoidService.ideal(p, b)
            return Judgement(
                claim=Claim(kind=ClaimKind.IDEAL_MEMBER, x=x, y=y),
                verdict=Verdict.PROVED if holds else Verdict.REFUTED,
                certificate=TableWitness(
                    holds=holds, lhs=p.elements[a], rhs=p.elements[b],
                    checked_up_to=FiniteMonoidService.multiplier_horizon(p, b),
                ),
            )
        _declared(p, x, y)
        with logfire.span("monoid.ideal_membership", x=str(x), y=str(y)):
            forced, _ = StateService.forced_set(p, y)
            if any(g not in forced for g in x.support()):
                return Judgement(
                    claim=Claim(kind=ClaimKind.IDEAL_MEMBER, x=x, y=y),
                    verdict=Verdict.REFUTED,
                    certificate=StateService.zero_infinity_state(p, forced),
                )
            for n in range(1, budget.n_max + 1):
                outcome = SearchService.leq_search(p, x, y.scale(n), budget)
                if outcome.derivation is not None:
                    return Judgement(
                        claim=Claim(kind=ClaimKind.IDEAL_MEMBER, x=x, y=y, n=n),
                        verdict=Verdict.PROVED,
                        certificate=outcome.derivation,
                    )
            n, derivation = StateService.ideal_derivation(p, x, y)
            return Judgement(
                claim=Claim(kind=ClaimKind.IDEAL_MEMBER, x=x, y=y, n=n),
                verdict=Verdict.PROVED,
                certificate=derivation,
                notes=("derivation built from the forcing provenance",),
            )

    @staticmethod
    def is_paradoxical(p: MonoidInput, x: Element, budget: SearchBudget) -> Judgement:
        """(n+1)·x <= n·x for some n >= 1, refuted by a state with ν(x) = 1."""
        if isinstance(p, FiniteMonoid):
            return FiniteMonoidService.paradoxical(p, x)
        _declared(p, x)
        if x.is_zero():
            raise zero_element("is_paradoxical")
        with logfire.span("monoid.is_paradoxical", x=str(x), n_max=budget.n_max):
            n, derivation, reports = TarskiService.multiplier_search(p, x, x, budget)
            if derivation is not None:
                logfire.info("monoid.is_paradoxical proved", n=n)
                return Judgement(
                    claim=Claim(kind=ClaimKind.PARADOXICAL, x=x, n=n),
                    verdict=Verdict.PROVED,
                    certificate=derivation,
                )
            outcome = StateService.find_state(p, x)
            if outcome.status == LPStatusKind.FEASIBLE:
                return Judgement(
                    claim=Claim(kind=ClaimKind.PARADOXICAL, x=x),
                    verdict=Verdict.REFUTED,
                    certificate=outcome.state,
                )
            logfire.warn("monoid.is_paradoxical budget exhausted", n_max=budget.n_max)
            return Judgement(
                claim=Claim(kind=ClaimKind.PARADOXICAL, x=x),
                verdict=Verdict.UNKNOWN,
                certificate=reports[-1],
                notes=("no state normalises x, so x is paradoxical, but no derivation fits the budget",),
            )

    @staticmethod
    def is_properly_infinite(p: MonoidInput, x: Element, budget: SearchBudget) -> Judgement:
        """2·x <= x."""
        if isinstance(p, FiniteMonoid):
            return FiniteMonoidService.properly_infinite(p, x)
        if x.is_zero():
            raise zero_element("is_properly_infinite")
        judgement = MonoidService.leq(p, x.scale(2), x, budget)
        return judgement.model_copy(update={"claim": Claim(kind=ClaimKind.PROPERLY_INFINITE, x=x, n=1)})

    @staticmethod
    def is_stably_dominated(p: MonoidInput, x: Element, y: Element, budget: SearchBudget) -> Judgement:
        if isinstance(p, FiniteMonoid):
            return FiniteMonoidService.stably_dominated(p, x, y)
        return TarskiService.rordam_tarski(p, x, y, budget)

    @staticmethod
    def is_order_unit(p: MonoidInput, y: Element, budget: SearchBudget) -> Judgement:
        """⟨y⟩ contains every generator."""
        if isinstance(p, FiniteMonoid):
            return FiniteMonoidService.order_unit(p, y)
        _declared(p, y)
        if y.is_zero():
            raise zero_element("is_order_unit")
        claim = Claim(kind=ClaimKind.ORDER_UNIT, y=y)
        forced, _ = StateService.forced_set(p, y)
        if len(forced) < len(p.generators):
            return Judgement(
                claim=claim,
                verdict=Verdict.REFUTED,
                certificate=StateService.zero_infinity_state(p, forced),
                notes=(f"{', '.join(g for g in p.generators if g not in forced)} outside ⟨y⟩",),
            )
        parts = []
        for g in p.generators:
            member = MonoidService.ideal_membership(p, Element.generator(g), y, budget)
            if member.verdict != Verdict.PROVED:
                return Judgement(
                    claim=claim,
                    verdict=Verdict.UNKNOWN,
                    certificate=member.certificate,
                    notes=(f"{g} is forced finite but no derivation into ⟨y⟩ was found",),
                )
            parts.append((f"{g} <= {member.claim.n}*({y})", member.certificate))
        return Judgement(claim=claim, verdict=Verdict.PROVED, certificate=composite(parts))

    @staticmethod
    def is_simple(p: MonoidInput, budget: SearchBudget) -> Judgement:
        """
        Every nonzero element is an order unit.

        Generators forced to 0 (g <= 0) are ignored; every other generator g
        must satisfy ⟨g⟩ ∋ h for every generator h.
        """
        if isinstance(p, FiniteMonoid):
            return FiniteMonoidService.simple(p)
        claim = Claim(kind=ClaimKind.SIMPLE)
        with logfire.span("monoid.is_simple", generators=len(p.generators)):
            null, _ = StateService.forced_set(p, Element())
            parts = []
            for g in p.generators:
                if g in null:
                    continue
                unit = Element.generator(g)
                forced, _ = StateService.forced_set(p, unit)
                if len(forced) < len(p.generators):
                    logfire.info("monoid.is_simple refuted", generator=g)
                    return Judgement(
                        claim=claim,
                        verdict=Verdict.REFUTED,
                        certificate=composite(
                            [
                                (f"{g} is nonzero", StateService.zero_infinity_state(p, null)),
                                (f"{g} is not an order unit", StateService.zero_infinity_state(p, forced)),
                            ]
                        ),
                    )
                for h in p.generators:
                    member = MonoidService.ideal_membership(p, Element.generator(h), unit, budget)
                    if member.verdict != Verdict.PROVED:
                        return Judgement(
                            claim=claim,
                            verdict=Verdict.UNKNOWN,
                            certificate=member.certificate,
                            notes=(f"no derivation of {h} into ⟨{g}⟩ within budget",),
                        )
                    parts.append((f"{h} <= {member.claim.n}*{g}", member.certificate))
            return Judgement(claim=claim, verdict=Verdict.PROVED, certificate=composite(parts))

    @staticmethod
    def quotient_by_ideal(p: MonoidPresentation, ideal_gens: Sequence[Element]) -> MonoidPresentation:
        """Present S/⟨ideal_gens⟩ by adding i == 0 for every ideal generator."""
        if not ideal_gens:
            raise ValidationException(
                message="quotient needs at least one ideal generator",
                error_code=ErrorCode.INVALID_INPUT,
                field="ideal_gens",
                constraint="nonempty",
            )
        _declared(p, *ideal_gens)
        extra = [Relation(lhs=i, rhs=Element(), kind=RelationKind.EQ) for i in ideal_gens]
        logfire.info("monoid.quotient_by_ideal", ideal=[str(i) for i in ideal_gens])
        return p.with_relations(extra)

    @staticmethod
    def brute_force_leq_oracle(p: MonoidPresentation, x: Element, y: Element, budget: SearchBudget) -> Judgement:
        """Plain forward closure from x; independent of ``leq``'s backward search."""
        _declared(p, x, y)
        claim = Claim(kind=ClaimKind.LEQ, x=x, y=y)
        with logfire.span("monoid.brute_force_leq_oracle", x=str(x), y=str(y)):
            outcome = SearchService.forward_closure(p, x, y, budget)
            if outcome.derivation is not None:
                return Judgement(claim=claim, verdict=Verdict.PROVED, certificate=outcome.derivation)
            return Judgement(claim=claim, verdict=Verdict.UNKNOWN, certificate=outcome.report)

    @staticmethod
    def congruent(p: MonoidPresentation, x: Element, y: Element, budget: SearchBudget, modulus_cap: int = 12) -> Judgement:
        """
        Decide x ~ y in the congruence generated by the EQ relations alone.

        LEQ relations and the 0 <= g axiom play no part here.
        """
        _declared(p, x, y)
        claim = Claim(kind=ClaimKind.CONGRUENT, x=x, y=y)
        with logfire.span("monoid.congruent", x=str(x), y=str(y), modulus_cap=modulus_cap):
            outcome = SearchService.forward_closure(p, x, y, budget, with_axioms=False, eq_only=True)
            if outcome.derivation is not None:
                return Judgement(claim=claim, verdict=Verdict.PROVED, certificate=outcome.derivation)
            if outcome.report.saturated and not outcome.report.pruned:
                members = tuple(Element.from_vector(p.generators, v) for v in outcome.visited)
                return Judgement(
                    claim=claim,
                    verdict=Verdict.REFUTED,
                    certificate=ClassEnumeration(members=members),
                )
            invariant = SearchService.modular_invariant(p, x, y, modulus_cap)
            if invariant is not None:
                return Judgement(claim=claim, verdict=Verdict.REFUTED, certificate=invariant)
            logfire.warn("monoid.congruent budget exhausted", nodes=outcome.report.nodes_explored)
            return Judgement(claim=claim, verdict=Verdict.UNKNOWN, certificate=outcome.report)

    @staticmethod
    def small_elements(p: MonoidPresentation, max_coefficient: int = 2) -> List[Element]:
        """Nonzero elements with every coefficient at most ``max_coefficient``."""
        out = []
        for coefficients in product(range(max_coefficient + 1), repeat=len(p.generators)):
            if any(coefficients):
                out.append(Element.from_vector(p.generators, coefficients))
        return sorted(out, key=lambda e: (e.total(), e.to_vector(p.generators)))

    @staticmethod
    def check_almost_unperforated(
        p: MonoidInput, budget: SearchBudget, max_coefficient: int = 1
    ) -> Judgement:
        """Look for x <_s y with x <= y refuted; UNKNOWN when the small pairs show none."""
        if isinstance(p, FiniteMonoid):
            return FiniteMonoidService.almost_unperforated(p)
        claim = Claim(kind=ClaimKind.ALMOST_UNPERFORATED)
        with logfire.span("monoid.check_almost_unperforated", max_coefficient=max_coefficient):
            candidates = MonoidService.small_elements(p, max_coefficient)
            for x in candidates:
                for y in candidates:
                    if x == y:
                        continue
                    dominated = TarskiService.multiplier_search(p, x, y, budget)
                    if dominated[1] is None:
                        continue
                    below = MonoidService.leq(p, x, y, budget)
                    if below.verdict == Verdict.REFUTED:
                        logfire.info("monoid.check_almost_unperforated refuted", x=str(x), y=str(y))
                        return Judgement(
                            claim=Claim(kind=ClaimKind.ALMOST_UNPERFORATED, x=x, y=y, n=dominated[0]),
                            verdict=Verdict.REFUTED,
                            certificate=composite(
                                [("stably dominated", dominated[1]), ("not below", below.certificate)]
                            ),
                        )
            return Judgement(
                claim=claim,
                verdict=Verdict.UNKNOWN,
                notes=(f"no perforation among elements with coefficients <= {max_coefficient}",),
            )
