"""
Exact answers on explicitly tabulated monoids.

Multiples k·a of any element are eventually periodic, so every question of
the form "for some n" is settled by checking n up to the preperiod plus the
period. The state side goes through ``export_finite_monoid`` and the same
exact LP used for presentations.
"""

from itertools import permutations, product
from math import lcm
from typing import Iterator, List, Optional, Set, Tuple

import logfire

from app.exceptions import ValidationException, zero_element
from app.models.error_models import ErrorCode
from app.models.judgement_models import Claim, ClaimKind, Judgement, Verdict, composite
from app.models.monoid_models import (
    Element,
    FiniteMonoid,
    LemmaCheck,
    LemmaReport,
    MonoidPresentation,
    Relation,
    RelationKind,
    TableWitness,
)
from app.models.state_models import LPStatusKind, StateVector
from app.services.state_service import StateService

ELEMENT_NAMES = ("0", "a", "b", "c", "d", "e", "f", "g")


class FiniteMonoidService:
    """
    Service class for exhaustive decisions on FiniteMonoid tables.
    """

    # -- element plumbing -------------------------------------------------

    @staticmethod
    def resolve(m: FiniteMonoid, x: Element) -> int:
        """Index of the element a combination of element names evaluates to."""
        unknown = next((g for g in x.support() if g not in m.elements), None)
        if unknown is not None:
            raise ValidationException(
                message=f"Element '{unknown}' is not in the table",
                error_code=ErrorCode.UNDECLARED_GENERATOR,
                field="elements",
                value=unknown,
                constraint=f"must be one of {', '.join(m.elements)}",
            )
        return m.evaluate(x)

    @staticmethod
    def unit(m: FiniteMonoid, a: int) -> Element:
        if a == m.zero:
            return Element()
        return Element.generator(m.elements[a])

    @staticmethod
    def is_zero_class(m: FiniteMonoid, a: int) -> bool:
        """a <= 0, i.e. a is equivalent to zero."""
        return m.le(a, m.zero)

    @staticmethod
    def periodicity(m: FiniteMonoid, a: int) -> Tuple[int, int]:
        """(preperiod, period) of k ↦ k·a for k >= 0."""
        seen = {}
        current, k = m.zero, 0
        while current not in seen:
            seen[current] = k
            current = m.sum(current, a)
            k += 1
        return seen[current], k - seen[current]

    @staticmethod
    def multiplier_horizon(m: FiniteMonoid, *elements: int) -> int:
        """Every pattern in (k·x_1, …, k·x_r) repeats after this many multiples."""
        pre, period = 0, 1
        for a in elements:
            s, t = FiniteMonoidService.periodicity(m, a)
            pre = max(pre, s)
            period = lcm(period, t)
        return pre + period + 1

    # -- exact predicates --------------------------------------------------

    @staticmethod
    def stable_domination_multiplier(m: FiniteMonoid, x: int, y: int) -> Optional[int]:
        """Least n >= 1 with (n+1)·x <= n·y, or None."""
        for n in range(1, FiniteMonoidService.multiplier_horizon(m, x, y) + 1):
            if m.le(m.multiple(n + 1, x), m.multiple(n, y)):
                return n
        return None

    @staticmethod
    def ideal(m: FiniteMonoid, y: int) -> Set[int]:
        """⟨y⟩ = {x : x <= n·y for some n >= 0}."""
        horizon = FiniteMonoidService.multiplier_horizon(m, y)
        multiples = {m.multiple(n, y) for n in range(horizon + 1)}
        return {x for x in range(m.size) if any(m.le(x, k) for k in multiples)}

    @staticmethod
    def is_properly_infinite(m: FiniteMonoid, x: int) -> bool:
        return m.le(m.sum(x, x), x)

    @staticmethod
    def is_paradoxical(m: FiniteMonoid, x: int) -> bool:
        return FiniteMonoidService.stable_domination_multiplier(m, x, x) is not None

    @staticmethod
    def is_order_unit(m: FiniteMonoid, y: int) -> bool:
        return len(FiniteMonoidService.ideal(m, y)) == m.size

    @staticmethod
    def nonzero_classes(m: FiniteMonoid) -> List[int]:
        return [a for a in range(m.size) if not FiniteMonoidService.is_zero_class(m, a)]

    @staticmethod
    def is_simple(m: FiniteMonoid) -> bool:
        return all(FiniteMonoidService.is_order_unit(m, a) for a in FiniteMonoidService.nonzero_classes(m))

    @staticmethod
    def compute_infiniteness_ideal(m: FiniteMonoid, y: int) -> Set[int]:
        """I(y) = {z : y + z <= y}."""
        return {z for z in range(m.size) if m.le(m.sum(y, z), y)}

    @staticmethod
    def is_ideal(m: FiniteMonoid, subset: Set[int]) -> bool:
        """Contains 0, closed under +, downward closed."""
        if m.zero not in subset:
            return False
        if any(m.sum(a, b) not in subset for a in subset for b in subset):
            return False
        return all(z in subset for w in subset for z in range(m.size) if m.le(z, w))

    @staticmethod
    def check_plain_paradoxes(m: FiniteMonoid) -> Tuple[bool, Optional[str]]:
        """Every paradoxical element is properly infinite; witness on failure."""
        for a in range(m.size):
            if FiniteMonoidService.is_paradoxical(m, a) and not FiniteMonoidService.is_properly_infinite(m, a):
                return False, m.elements[a]
        return True, None

    @staticmethod
    def check_purely_infinite(m: FiniteMonoid) -> Tuple[bool, Optional[str]]:
        for a in FiniteMonoidService.nonzero_classes(m):
            if not FiniteMonoidService.is_properly_infinite(m, a):
                return False, m.elements[a]
        return True, None

    @staticmethod
    def is_almost_unperforated(m: FiniteMonoid) -> Tuple[bool, Optional[Tuple[str, str]]]:
        """x <_s y implies x <= y; the first violating pair otherwise."""
        for x in range(m.size):
            for y in range(m.size):
                if m.le(x, y):
                    continue
                if FiniteMonoidService.stable_domination_multiplier(m, x, y) is not None:
                    return False, (m.elements[x], m.elements[y])
        return True, None

    @staticmethod
    def is_conical(m: FiniteMonoid) -> bool:
        return all(
            m.sum(a, b) != m.zero or (a == m.zero and b == m.zero)
            for a in range(m.size)
            for b in range(m.size)
        )

    @staticmethod
    def ordered_quotient(m: FiniteMonoid) -> FiniteMonoid:
        """Antisymmetrisation: classes of a <= b <= a, named by their first member."""
        representative = {}
        classes: List[int] = []
        for a in range(m.size):
            for r in classes:
                if m.le(a, r) and m.le(r, a):
                    representative[a] = r
                    break
            else:
                classes.append(a)
                representative[a] = a
        index = {r: i for i, r in enumerate(classes)}
        add = tuple(
            tuple(index[representative[m.sum(r, s)]] for s in classes) for r in classes
        )
        leq = tuple(tuple(m.le(r, s) for s in classes) for r in classes)
        return FiniteMonoid(
            elements=tuple(m.elements[r] for r in classes),
            add=add,
            zero=index[representative[m.zero]],
            leq=leq,
        )

    # -- states ------------------------------------------------------------

    @staticmethod
    def export_finite_monoid(m: FiniteMonoid) -> MonoidPresentation:
        """Generators are the nonzero elements; relations come from the two tables."""
        unit = lambda a: FiniteMonoidService.unit(m, a)
        generators = tuple(m.elements[a] for a in range(m.size) if a != m.zero)
        relations = []
        for a in range(m.size):
            if a == m.zero:
                continue
            for b in range(a, m.size):
                if b == m.zero:
                    continue
                relations.append(Relation(lhs=unit(a) + unit(b), rhs=unit(m.sum(a, b)), kind=RelationKind.EQ))
        for a in range(m.size):
            for b in range(m.size):
                if a != b and a != m.zero and m.le(a, b):
                    relations.append(Relation(lhs=unit(a), rhs=unit(b), kind=RelationKind.LEQ))
        return MonoidPresentation(generators=generators, relations=tuple(relations))

    @staticmethod
    def normalising_state(m: FiniteMonoid, x: int) -> Optional[StateVector]:
        """A state with ν(x) = 1, or None when x is paradoxical."""
        if FiniteMonoidService.is_zero_class(m, x):
            return None
        outcome = StateService.find_state(FiniteMonoidService.export_finite_monoid(m), FiniteMonoidService.unit(m, x))
        return outcome.state if outcome.status == LPStatusKind.FEASIBLE else None

    @staticmethod
    def stable_domination_state(m: FiniteMonoid, x: int, y: int) -> Optional[StateVector]:
        """A state refuting x <_s y: ν(x) = ∞ with ν(y) finite, or ν(x) >= ν(y) = 1."""
        p = FiniteMonoidService.export_finite_monoid(m)
        ux, uy = FiniteMonoidService.unit(m, x), FiniteMonoidService.unit(m, y)
        forced, _ = StateService.forced_set(p, uy)
        if any(g not in forced for g in ux.support()):
            return StateService.zero_infinity_state(p, forced)
        if uy.is_zero():
            return None
        sup = StateService.sup_state_value(p, ux, uy)
        if sup.status == LPStatusKind.FEASIBLE and sup.optimum_value >= 1:
            return sup.state
        return None

    # -- judgements ----------------------------------------------------------

    @staticmethod
    def leq(m: FiniteMonoid, x: Element, y: Element) -> Judgement:
        a, b = FiniteMonoidService.resolve(m, x), FiniteMonoidService.resolve(m, y)
        holds = m.le(a, b)
        return Judgement(
            claim=Claim(kind=ClaimKind.LEQ, x=x, y=y),
            verdict=Verdict.PROVED if holds else Verdict.REFUTED,
            certificate=TableWitness(holds=holds, lhs=m.elements[a], rhs=m.elements[b]),
        )

    @staticmethod
    def paradoxical(m: FiniteMonoid, x: Element) -> Judgement:
        a = FiniteMonoidService.resolve(m, x)
        if a == m.zero:
            raise zero_element("is_paradoxical")
        with logfire.span("finite_monoid.paradoxical", element=m.elements[a]):
            n = FiniteMonoidService.stable_domination_multiplier(m, a, a)
            claim = Claim(kind=ClaimKind.PARADOXICAL, x=x, n=n)
            horizon = FiniteMonoidService.multiplier_horizon(m, a)
            if n is not None:
                return Judgement(
                    claim=claim,
                    verdict=Verdict.PROVED,
                    certificate=TableWitness(
                        holds=True,
                        n=n,
                        lhs=m.elements[m.multiple(n + 1, a)],
                        rhs=m.elements[m.multiple(n, a)],
                    ),
                )
            state = FiniteMonoidService.normalising_state(m, a)
            if state is None:
                logfire.error("finite_monoid.paradoxical found neither a multiplier nor a state", element=m.elements[a])
            return Judgement(
                claim=claim,
                verdict=Verdict.REFUTED,
                certificate=state or TableWitness(holds=False, checked_up_to=horizon),
            )

    @staticmethod
    def properly_infinite(m: FiniteMonoid, x: Element) -> Judgement:
        a = FiniteMonoidService.resolve(m, x)
        if a == m.zero:
            raise zero_element("is_properly_infinite")
        double = m.sum(a, a)
        holds = m.le(double, a)
        return Judgement(
            claim=Claim(kind=ClaimKind.PROPERLY_INFINITE, x=x),
            verdict=Verdict.PROVED if holds else Verdict.REFUTED,
            certificate=TableWitness(holds=holds, n=1, lhs=m.elements[double], rhs=m.elements[a]),
        )

    @staticmethod
    def stably_dominated(m: FiniteMonoid, x: Element, y: Element) -> Judgement:
        a, b = FiniteMonoidService.resolve(m, x), FiniteMonoidService.resolve(m, y)
        n = FiniteMonoidService.stable_domination_multiplier(m, a, b)
        claim = Claim(kind=ClaimKind.STABLY_DOMINATED, x=x, y=y, n=n)
        if n is not None:
            return Judgement(
                claim=claim,
                verdict=Verdict.PROVED,
                certificate=TableWitness(
                    holds=True, n=n, lhs=m.elements[m.multiple(n + 1, a)], rhs=m.elements[m.multiple(n, b)]
                ),
            )
        state = FiniteMonoidService.stable_domination_state(m, a, b)
        if state is None:
            logfire.error("finite_monoid.stably_dominated has no separating state", x=str(x), y=str(y))
        return Judgement(
            claim=claim,
            verdict=Verdict.REFUTED,
            certificate=state or TableWitness(holds=False, checked_up_to=FiniteMonoidService.multiplier_horizon(m, a, b)),
        )

    @staticmethod
    def order_unit(m: FiniteMonoid, y: Element) -> Judgement:
        b = FiniteMonoidService.resolve(m, y)
        if b == m.zero:
            raise zero_element("is_order_unit")
        below = FiniteMonoidService.ideal(m, b)
        missing = [a for a in range(m.size) if a not in below]
        return Judgement(
            claim=Claim(kind=ClaimKind.ORDER_UNIT, y=y),
            verdict=Verdict.REFUTED if missing else Verdict.PROVED,
            certificate=TableWitness(
                holds=not missing,
                lhs=m.elements[missing[0]] if missing else None,
                rhs=m.elements[b],
                checked_up_to=FiniteMonoidService.multiplier_horizon(m, b),
                note="first element outside the ideal" if missing else "",
            ),
        )

    @staticmethod
    def simple(m: FiniteMonoid) -> Judgement:
        for a in FiniteMonoidService.nonzero_classes(m):
            below = FiniteMonoidService.ideal(m, a)
            missing = [c for c in range(m.size) if c not in below]
            if missing:
                return Judgement(
                    claim=Claim(kind=ClaimKind.SIMPLE),
                    verdict=Verdict.REFUTED,
                    certificate=TableWitness(
                        holds=False,
                        lhs=m.elements[missing[0]],
                        rhs=m.elements[a],
                        note="element outside the ideal of a nonzero element",
                    ),
                )
        return Judgement(
            claim=Claim(kind=ClaimKind.SIMPLE),
            verdict=Verdict.PROVED,
            certificate=TableWitness(holds=True, note="every nonzero element is an order unit"),
        )

    @staticmethod
    def almost_unperforated(m: FiniteMonoid) -> Judgement:
        holds, pair = FiniteMonoidService.is_almost_unperforated(m)
        if holds:
            return Judgement(
                claim=Claim(kind=ClaimKind.ALMOST_UNPERFORATED),
                verdict=Verdict.PROVED,
                certificate=TableWitness(holds=True, note="checked every pair"),
            )
        x, y = (m.index(name) for name in pair)
        n = FiniteMonoidService.stable_domination_multiplier(m, x, y)
        return Judgement(
            claim=Claim(kind=ClaimKind.ALMOST_UNPERFORATED),
            verdict=Verdict.REFUTED,
            certificate=composite(
                [
                    ("stably dominated", TableWitness(holds=True, n=n, lhs=pair[0], rhs=pair[1])),
                    ("not below", TableWitness(holds=False, lhs=pair[0], rhs=pair[1])),
                ]
            ),
        )

    # -- lemma verification --------------------------------------------------

    @staticmethod
    def check_lemmas(m: FiniteMonoid) -> LemmaReport:
        """Exhaustive verification of the structural facts about ideals, infiniteness and states."""
        svc = FiniteMonoidService
        name = lambda a: m.elements[a]
        checks: List[LemmaCheck] = []

        def record(title: str, counterexample: Optional[str]) -> None:
            checks.append(LemmaCheck(name=title, holds=counterexample is None, counterexample=counterexample))

        with logfire.span("finite_monoid.check_lemmas", size=m.size):
            ideals = {y: svc.ideal(m, y) for y in range(m.size)}
            inf_ideals = {y: svc.compute_infiniteness_ideal(m, y) for y in range(m.size)}

            record(
                "infiniteness ideal is an ideal inside the generated ideal",
                next(
                    (name(y) for y in range(m.size) if not svc.is_ideal(m, inf_ideals[y]) or not inf_ideals[y] <= ideals[y]),
                    None,
                ),
            )
            record(
                "properly infinite iff infiniteness ideal equals the generated ideal",
                next(
                    (
                        name(y)
                        for y in svc.nonzero_classes(m)
                        if svc.is_properly_infinite(m, y) != (inf_ideals[y] == ideals[y])
                    ),
                    None,
                ),
            )

            def finite_in_quotient(y: int) -> bool:
                ideal = inf_ideals[y]
                for z in range(m.size):
                    if z in ideal:
                        continue
                    for a in ideal:
                        for b in ideal:
                            if m.le(m.sum(m.sum(y, z), a), m.sum(y, b)):
                                return False
                return True

            record(
                "image of y modulo its infiniteness ideal is finite",
                next((name(y) for y in range(m.size) if not finite_in_quotient(y)), None),
            )
            record(
                "properly infinite iff the generated ideal is the set of elements below",
                next(
                    (
                        name(y)
                        for y in svc.nonzero_classes(m)
                        if svc.is_properly_infinite(m, y)
                        != (ideals[y] == {x for x in range(m.size) if m.le(x, y)})
                    ),
                    None,
                ),
            )

            simple = svc.is_simple(m)
            if simple:
                record(
                    "simple: every element is finite or properly infinite",
                    next(
                        (
                            name(y)
                            for y in range(m.size)
                            if inf_ideals[y] != {z for z in range(m.size) if svc.is_zero_class(m, z)}
                            and not svc.is_properly_infinite(m, y)
                        ),
                        None,
                    ),
                )

            record(
                "paradoxical y: the generated ideal is the set of elements stably dominated by y",
                next(
                    (
                        name(y)
                        for y in range(m.size)
                        if svc.is_paradoxical(m, y)
                        and ideals[y]
                        != {x for x in range(m.size) if svc.stable_domination_multiplier(m, x, y) is not None}
                    ),
                    None,
                ),
            )

            if svc.is_conical(m):
                def some_multiple_properly_infinite(x: int) -> bool:
                    horizon = svc.multiplier_horizon(m, x)
                    return any(svc.is_properly_infinite(m, m.multiple(n, x)) for n in range(1, horizon + 1))

                record(
                    "conical: paradoxical iff some multiple is properly infinite",
                    next(
                        (
                            name(x)
                            for x in range(m.size)
                            if x != m.zero and svc.is_paradoxical(m, x) != some_multiple_properly_infinite(x)
                        ),
                        None,
                    ),
                )

            quotient = svc.ordered_quotient(m)
            pure, _ = svc.check_purely_infinite(m)
            at_most_two = quotient.size == 1 or (
                quotient.size == 2
                and all(quotient.sum(a, a) == a for a in range(2))
            )
            record(
                "simple and purely infinite iff the ordered quotient embeds in {0, ∞}",
                None if (simple and pure) == at_most_two else "quotient " + ",".join(quotient.elements),
            )

            states = {x: svc.normalising_state(m, x) for x in svc.nonzero_classes(m)}
            record(
                "each element is paradoxical or normalised by a state, never both",
                next(
                    (
                        name(x)
                        for x in range(m.size)
                        if x != m.zero and svc.is_paradoxical(m, x) == (states.get(x) is not None)
                    ),
                    None,
                ),
            )

            plain, _ = svc.check_plain_paradoxes(m)
            if plain:
                nontrivial = any(state is not None for state in states.values())
                record(
                    "plain paradoxes: a nontrivial state exists or the monoid is purely infinite",
                    None if nontrivial or pure else "neither",
                )

            def criterion_fails(x: int, y: int) -> bool:
                dominated = svc.stable_domination_multiplier(m, x, y) is not None
                separated = svc.stable_domination_state(m, x, y) is not None
                return dominated == separated

            record(
                "x is stably dominated by y iff no state separates them",
                next(
                    (
                        f"{name(x)},{name(y)}"
                        for y in svc.nonzero_classes(m)
                        for x in range(m.size)
                        if criterion_fails(x, y)
                    ),
                    None,
                ),
            )
            report = LemmaReport(checks=tuple(checks))
            if not report.all_hold:
                logfire.error("finite_monoid.check_lemmas failed", failed=[c.name for c in report.failed()])
            return report

    # -- enumeration -----------------------------------------------------------

    @staticmethod
    def enumerate_tables(size: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
        """Commutative associative tables with neutral 0, one per isomorphism class."""
        if size < 1:
            return
        cells = [(i, j) for i in range(1, size) for j in range(i, size)]
        seen: Set[Tuple[Tuple[int, ...], ...]] = set()
        relabelings = [(0,) + perm for perm in permutations(range(1, size))]
        for values in product(range(size), repeat=len(cells)):
            table = [[0] * size for _ in range(size)]
            for k in range(size):
                table[0][k] = table[k][0] = k
            for (i, j), v in zip(cells, values):
                table[i][j] = table[j][i] = v
            if any(
                table[table[a][b]][c] != table[a][table[b][c]]
                for a in range(1, size)
                for b in range(1, size)
                for c in range(1, size)
            ):
                continue
            frozen = tuple(tuple(row) for row in table)
            if frozen in seen:
                continue
            for perm in relabelings:
                inverse = {perm[k]: k for k in range(size)}
                seen.add(
                    tuple(
                        tuple(perm[table[inverse[a]][inverse[b]]] for b in range(size))
                        for a in range(size)
                    )
                )
            yield frozen

    @staticmethod
    def enumerate_preorders(add: Tuple[Tuple[int, ...], ...]) -> Iterator[Tuple[Tuple[bool, ...], ...]]:
        """Translation-invariant preorders with 0 at the bottom."""
        size = len(add)
        free = [(a, b) for a in range(1, size) for b in range(size) if a != b]
        for bits in product((False, True), repeat=len(free)):
            leq = [[a == b or a == 0 for b in range(size)] for a in range(size)]
            for (a, b), bit in zip(free, bits):
                leq[a][b] = bit
            if any(
                leq[a][b] and leq[b][c] and not leq[a][c]
                for a in range(size)
                for b in range(size)
                for c in range(size)
            ):
                continue
            if any(
                leq[a][b] and not leq[add[a][c]][add[b][c]]
                for a in range(size)
                for b in range(size)
                for c in range(size)
            ):
                continue
            yield tuple(tuple(row) for row in leq)

    @staticmethod
    def enumerate_finite_monoids(size: int) -> Iterator[FiniteMonoid]:
        """Every valid tabulated monoid of the given size, tables up to relabeling."""
        if size > len(ELEMENT_NAMES):
            raise ValidationException(
                message=f"enumeration supports at most {len(ELEMENT_NAMES)} elements",
                field="size",
                value=size,
                constraint=f"<= {len(ELEMENT_NAMES)}",
            )
        names = ELEMENT_NAMES[:size]
        for add in FiniteMonoidService.enumerate_tables(size):
            for leq in FiniteMonoidService.enumerate_preorders(add):
                yield FiniteMonoid(elements=names, add=add, zero=0, leq=leq)

    @staticmethod
    def algebraic(elements: Tuple[str, ...], add: Tuple[Tuple[int, ...], ...], zero: int = 0) -> FiniteMonoid:
        """The table with its algebraic preorder: x <= y iff x + z = y for some z."""
        n = len(elements)
        leq = tuple(tuple(any(add[x][z] == y for z in range(n)) for y in range(n)) for x in range(n))
        return FiniteMonoid(elements=elements, add=add, zero=zero, leq=leq)
