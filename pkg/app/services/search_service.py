"""
Bounded rewrite searches over a presented preordered monoid.

Any derivation can be reordered so that all ``0 <= g`` axiom steps come
first: x <= y holds iff some z >= x (componentwise) rewrites to y using the
relation rules alone. ``leq_search`` therefore explores the rules backwards
from y, cheapest total coefficient first, and stops at the first z that
dominates x.
"""

import heapq
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterable, List, Optional, Tuple

import logfire

from app.models.monoid_models import (
    BudgetReport,
    Derivation,
    DerivationStep,
    Direction,
    Element,
    LeqRule,
    MonoidPresentation,
    ModularInvariant,
    RelationKind,
    SearchBudget,
    StepRule,
)

Vector = Tuple[int, ...]


@dataclass
class SearchOutcome:
    derivation: Optional[Derivation]
    report: BudgetReport
    visited: List[Vector] = field(default_factory=list)


def _vec(x: Element, gens: Tuple[str, ...]) -> Vector:
    return x.to_vector(gens)


def _sub(a: Vector, b: Vector) -> Vector:
    return tuple(i - j for i, j in zip(a, b))


def _add(a: Vector, b: Vector) -> Vector:
    return tuple(i + j for i, j in zip(a, b))


def _ge(a: Vector, b: Vector) -> bool:
    return all(i >= j for i, j in zip(a, b))


class SearchService:
    """
    Rewrite-system searches that produce replayable derivations.
    """

    @staticmethod
    def apply_step(p: MonoidPresentation, v: Element, step: DerivationStep) -> Element:
        """Apply one derivation step to ``v``; raises ValueError when it does not apply."""
        if step.rule == StepRule.AXIOM:
            if step.added is None or step.added not in p.generators:
                raise ValueError("axiom step must add a declared generator")
            return v + Element.generator(step.added)
        if step.relation_index is None or step.direction is None:
            raise ValueError("relation step must cite a relation and a direction")
        if not 0 <= step.relation_index < len(p.relations):
            raise ValueError(f"relation {step.relation_index} does not exist")
        rule = p.rule(step.relation_index, step.direction)
        if rule.lhs + step.context != v:
            raise ValueError(
                f"step cites relation {step.relation_index} but {v} != {rule.lhs} + {step.context}"
            )
        return rule.rhs + step.context

    @staticmethod
    def replay(p: MonoidPresentation, derivation: Derivation) -> bool:
        v = derivation.start
        try:
            for step in derivation.steps:
                v = SearchService.apply_step(p, v, step)
        except ValueError:
            return False
        return v == derivation.end

    @staticmethod
    def axiom_derivation(x: Element, z: Element) -> Derivation:
        """x <= z for z >= x: add the missing generators one at a time, in name order."""
        steps = []
        for g, c in z.minus(x).terms:
            steps.extend(DerivationStep(rule=StepRule.AXIOM, added=g) for _ in range(c))
        return Derivation(start=x, steps=tuple(steps), end=z)

    @staticmethod
    def relation_step(rule: LeqRule, context: Element) -> DerivationStep:
        return DerivationStep(
            rule=StepRule.RELATION,
            relation_index=rule.relation_index,
            direction=rule.direction,
            context=context,
        )

    @staticmethod
    def _nontrivial_rules(rules: Iterable[LeqRule]) -> List[LeqRule]:
        return [rule for rule in rules if rule.lhs != rule.rhs]

    @staticmethod
    def leq_search(
        p: MonoidPresentation, x: Element, y: Element, budget: SearchBudget
    ) -> SearchOutcome:
        """Backward best-first search from y for some z >= x with z →* y."""
        gens = p.generators
        xv, yv = _vec(x, gens), _vec(y, gens)
        rules = [
            (rule, _vec(rule.lhs, gens), _vec(rule.rhs, gens))
            for rule in SearchService._nontrivial_rules(p.rules())
        ]
        # parent[z] = (w, rule, context): z = lhs + context → rhs + context = w
        parent: Dict[Vector, Optional[Tuple[Vector, LeqRule, Vector]]] = {yv: None}
        heap = [(sum(yv), yv)]
        pops = 0
        pruned = False
        found: Optional[Vector] = None
        while heap:
            _, z = heapq.heappop(heap)
            pops += 1
            if _ge(z, xv):
                found = z
                break
            if pops >= budget.node_cap:
                break
            for rule, lhs, rhs in rules:
                if not _ge(z, rhs):
                    continue
                context = _sub(z, rhs)
                pred = _add(context, lhs)
                if pred in parent:
                    continue
                if max(pred, default=0) > budget.coeff_cap:
                    pruned = True
                    continue
                parent[pred] = (z, rule, context)
                heapq.heappush(heap, (sum(pred), pred))
        saturated = found is None and not heap and not pruned
        report = BudgetReport.for_budget(
            budget,
            nodes_explored=pops,
            pruned=pruned,
            saturated=saturated,
            reason="" if found is not None else ("closure exhausted" if not heap else "node cap reached"),
        )
        if found is None:
            return SearchOutcome(derivation=None, report=report, visited=list(parent))
        z = Element.from_vector(gens, found)
        derivation = SearchService.axiom_derivation(x, z)
        steps = list(derivation.steps)
        cursor = found
        while parent[cursor] is not None:
            w, rule, context = parent[cursor]
            steps.append(SearchService.relation_step(rule, Element.from_vector(gens, context)))
            cursor = w
        return SearchOutcome(
            derivation=Derivation(start=x, steps=tuple(steps), end=y), report=report
        )

    @staticmethod
    def forward_closure(
        p: MonoidPresentation,
        x: Element,
        target: Element,
        budget: SearchBudget,
        with_axioms: bool = True,
        eq_only: bool = False,
    ) -> SearchOutcome:
        """Plain breadth-first closure from x inside the coefficient box.

        ``saturated`` in the report means the reachable set inside the box
        was enumerated completely (no node-cap cut-off).
        """
        gens = p.generators
        rules = p.rules()
        if eq_only:
            rules = [r for r in rules if p.relations[r.relation_index].kind == RelationKind.EQ]
        rules = [
            (rule, _vec(rule.lhs, gens), _vec(rule.rhs, gens))
            for rule in SearchService._nontrivial_rules(rules)
        ]
        units = [tuple(1 if k == j else 0 for k in range(len(gens))) for j in range(len(gens))]
        start, goal = _vec(x, gens), _vec(target, gens)
        parent: Dict[Vector, Optional[Tuple[Vector, DerivationStep]]] = {start: None}
        queue = deque([start])
        pruned = False
        capped = False
        found = start == goal
        while queue and not found:
            if len(parent) >= budget.node_cap:
                capped = True
                break
            v = queue.popleft()
            moves: List[Tuple[Vector, DerivationStep]] = []
            for rule, lhs, rhs in rules:
                if _ge(v, lhs):
                    context = _sub(v, lhs)
                    moves.append(
                        (_add(context, rhs), SearchService.relation_step(rule, Element.from_vector(gens, context)))
                    )
            if with_axioms:
                for j, unit in enumerate(units):
                    moves.append((_add(v, unit), DerivationStep(rule=StepRule.AXIOM, added=gens[j])))
            for w, step in moves:
                if w in parent:
                    continue
                if max(w, default=0) > budget.coeff_cap:
                    pruned = True
                    continue
                parent[w] = (v, step)
                if w == goal:
                    found = True
                    break
                queue.append(w)
        report = BudgetReport.for_budget(
            budget,
            nodes_explored=len(parent),
            pruned=pruned,
            saturated=not capped and not queue,
            reason="CAP-COMPLETE" if not capped and not queue and not found else "",
        )
        if not found:
            return SearchOutcome(derivation=None, report=report, visited=list(parent))
        steps: List[DerivationStep] = []
        cursor = goal
        while parent[cursor] is not None:
            prev, step = parent[cursor]
            steps.append(step)
            cursor = prev
        steps.reverse()
        return SearchOutcome(
            derivation=Derivation(start=x, steps=tuple(steps), end=target),
            report=report,
            visited=list(parent),
        )

    @staticmethod
    def modular_invariant(
        p: MonoidPresentation, x: Element, y: Element, modulus_cap: int, assignment_cap: int = 200_000
    ) -> Optional[ModularInvariant]:
        """Additive map into ℤ/m, constant on every EQ relation, separating x from y."""
        gens = p.generators
        eqs = [
            (_vec(r.lhs, gens), _vec(r.rhs, gens))
            for r in p.relations
            if r.kind == RelationKind.EQ
        ]
        xv, yv = _vec(x, gens), _vec(y, gens)
        with logfire.span("search.modular_invariant", modulus_cap=modulus_cap):
            for m in range(2, modulus_cap + 1):
                if m ** len(gens) > assignment_cap:
                    break
                for phi in product(range(m), repeat=len(gens)):
                    dot = lambda v: sum(a * b for a, b in zip(phi, v)) % m
                    if dot(xv) == dot(yv):
                        continue
                    if all(dot(lhs) == dot(rhs) for lhs, rhs in eqs):
                        return ModularInvariant(modulus=m, values=tuple(zip(gens, phi)))
        return None
