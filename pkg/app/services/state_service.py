"""
States on presented monoids via exact linear programming.

A state with ν(y) finite must be finite on the forced set F(y): start from
supp(y) and add the generators of ``lhs`` whenever ``rhs`` lies in F for a
rule lhs <= rhs. F(y) is exactly the set of generators of the ideal ⟨y⟩:
every member has a constructive bound g <= m·y read off the provenance, and
the state that is 0 on F(y) and ∞ elsewhere satisfies every relation.
"""

import time
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import logfire

from app.config.analysis_config import analysis_config
from app.exceptions import (
    PreconditionException,
    ValidationException,
    premise_violated,
    undeclared_generator,
    zero_element,
)
from app.models.error_models import ErrorCode
from app.models.judgement_models import Claim, ClaimKind, Judgement, Verdict, composite
from app.models.monoid_models import (
    Derivation,
    Element,
    LeqRule,
    MonoidPresentation,
    SearchBudget,
)
from app.models.state_models import (
    DualBound,
    EliminationSummary,
    ExtensionCertificate,
    FarkasCertificate,
    StateExtension,
    LPOutcome,
    LPStatusKind,
    StateVector,
)
from app.services.search_service import SearchService
from app.utils import fourier_motzkin
from app.utils.linear_program import (
    LinearProgram,
    LPStatus,
    Row,
    Sense,
    check_farkas,
    check_upper_bound,
)
from app.utils.rationals import INF, ExtRational, fmt

Provenance = Dict[str, Optional[LeqRule]]


class StateService:
    """
    Service class for state existence, state optimisation and ideal membership.
    """

    @staticmethod
    def forced_set(p: MonoidPresentation, y: Element) -> Tuple[Tuple[str, ...], Provenance]:
        """Generators forced finite by ν(y) < ∞, with the rule that forced each."""
        provenance: Provenance = {g: None for g in y.support()}
        rules = p.rules()
        changed = True
        while changed:
            changed = False
            for rule in rules:
                if all(h in provenance for h in rule.rhs.support()):
                    for g in rule.lhs.support():
                        if g not in provenance:
                            provenance[g] = rule
                            changed = True
        forced = tuple(g for g in p.generators if g in provenance)
        return forced, provenance

    @staticmethod
    def zero_infinity_state(p: MonoidPresentation, forced: Sequence[str]) -> StateVector:
        """0 on ``forced``, ∞ elsewhere; a state whenever ``forced`` is a forced set."""
        inside = set(forced)
        return StateVector.of({g: Fraction(0) if g in inside else INF for g in p.generators})

    @staticmethod
    def generator_bounds(
        p: MonoidPresentation, y: Element
    ) -> Dict[str, Tuple[int, Derivation]]:
        """For each forced generator g a derivation g <= m·y built from the provenance."""
        forced, provenance = StateService.forced_set(p, y)
        bounds: Dict[str, Tuple[int, Derivation]] = {}
        order = StateService._forcing_order(forced, provenance, y)
        for g in order:
            rule = provenance[g]
            unit = Element.generator(g)
            if rule is None:
                bounds[g] = (1, SearchService.axiom_derivation(unit, y))
                continue
            # g <= lhs → rhs, then every unit h of rhs is replaced by m_h·y
            head = SearchService.axiom_derivation(unit, rule.lhs)
            steps = list(head.steps) + [SearchService.relation_step(rule, Element())]
            current = rule.rhs
            multiple = 0
            for h, c in rule.rhs.terms:
                m_h, d_h = bounds[h]
                for _ in range(c):
                    rest = current.minus(Element.generator(h))
                    steps.extend(d_h.shifted(rest).steps)
                    current = y.scale(m_h) + rest
                    multiple += m_h
            bounds[g] = (multiple, Derivation(start=unit, steps=tuple(steps), end=current))
        return bounds

    @staticmethod
    def _forcing_order(forced, provenance: Provenance, y: Element) -> List[str]:
        placed = [g for g in y.support()]
        seen = set(placed)
        pending = [g for g in forced if g not in seen]
        while pending:
            progress = False
            for g in list(pending):
                rule = provenance[g]
                if all(h in seen for h in rule.rhs.support()):
                    placed.append(g)
                    seen.add(g)
                    pending.remove(g)
                    progress = True
            if not progress:
                raise RuntimeError("forced set provenance is not well founded")
        return placed

    @staticmethod
    def ideal_derivation(
        p: MonoidPresentation, x: Element, y: Element
    ) -> Optional[Tuple[int, Derivation]]:
        """Constructive x <= n·y (n >= 1) when supp(x) is forced, else None."""
        bounds = StateService.generator_bounds(p, y)
        if any(g not in bounds for g in x.support()):
            return None
        steps = []
        current = x
        multiple = 0
        for g, c in x.terms:
            m_g, d_g = bounds[g]
            for _ in range(c):
                rest = current.minus(Element.generator(g))
                steps.extend(d_g.shifted(rest).steps)
                current = y.scale(m_g) + rest
                multiple += m_g
        if multiple == 0:
            tail = SearchService.axiom_derivation(current, y)
            steps.extend(tail.steps)
            current, multiple = y, 1
        return multiple, Derivation(start=x, steps=tuple(steps), end=current)

    @staticmethod
    def state_rows(
        p: MonoidPresentation, forced: Sequence[str], y: Element
    ) -> Tuple[List[str], List[Row]]:
        """Constraint rows over the forced generators: ν(lhs) - ν(rhs) <= 0 and ν(y) = 1."""
        names = list(forced)
        inside = set(names)
        rows: List[Row] = []
        for rule in p.rules():
            support = set(rule.lhs.support()) | set(rule.rhs.support())
            if not support <= inside or rule.lhs == rule.rhs:
                continue
            coefficients = tuple(
                Fraction(rule.lhs.coefficient(g) - rule.rhs.coefficient(g)) for g in names
            )
            rows.append(
                Row(coefficients, Sense.LE, Fraction(0), f"relation {rule.relation_index} {rule.direction.value}")
            )
        rows.append(Row(tuple(Fraction(y.coefficient(g)) for g in names), Sense.EQ, Fraction(1), "normalisation"))
        return names, rows

    @staticmethod
    def _check_target(p: MonoidPresentation, *elements: Element) -> None:
        if not p.generators:
            raise ValidationException(
                message="presentation has no generators",
                error_code=ErrorCode.INVALID_INPUT,
                field="generators",
                constraint="at least one generator",
            )
        for element in elements:
            missing = p.undeclared(element)
            if missing is not None:
                raise undeclared_generator(missing, list(p.generators))

    @staticmethod
    def _solve(names: List[str], rows: List[Row], objective: Optional[Element] = None):
        lp = LinearProgram(len(names), names)
        for row in rows:
            lp.add_row(row.coefficients, row.sense, row.rhs, row.label)
        if objective is not None:
            lp.set_objective([objective.coefficient(g) for g in names])
        return lp.solve()

    @staticmethod
    def _cross_check(names: List[str], rows: List[Row]) -> Tuple[Optional[bool], Tuple[EliminationSummary, ...]]:
        if len(names) > analysis_config.fm_max_vars:
            return None, ()
        system = [
            ({g: c for g, c in zip(names, row.coefficients) if c}, row.sense.value, row.rhs)
            for row in rows
        ]
        ok, trace = fourier_motzkin.feasible(names, system)
        steps = tuple(
            EliminationSummary(
                variable=s.variable,
                method=s.method,
                zero=s.zero,
                positive=s.positive,
                negative=s.negative,
                rows_after=s.rows_after,
            )
            for s in trace.steps
        )
        return ok, steps

    @staticmethod
    def _extend(p: MonoidPresentation, names: Sequence[str], point: Sequence[Fraction]) -> StateVector:
        values: Dict[str, ExtRational] = {g: INF for g in p.generators}
        values.update(dict(zip(names, point)))
        return StateVector.of(values)

    @staticmethod
    def _ambiguous(
        p: MonoidPresentation, forced: Sequence[str], y: Element, budget: Optional[SearchBudget]
    ) -> Tuple[str, ...]:
        if budget is None:
            return ()
        top = y.scale(budget.n_max)
        return tuple(
            g
            for g in forced
            if SearchService.leq_search(p, Element.generator(g), top, budget).derivation is None
        )

    @staticmethod
    def find_state(
        p: MonoidPresentation, y: Element, budget: Optional[SearchBudget] = None
    ) -> LPOutcome:
        """
        Decide whether a state with ν(y) = 1 exists.

        Returns:
            LPOutcome: FEASIBLE with a state (∞ off the forced set), or
            INFEASIBLE with Farkas multipliers over the forced-set rows.

        Raises:
            ValidationException: If y = 0 or the presentation has no generators
        """
        StateService._check_target(p, y)
        if y.is_zero():
            raise zero_element("find_state")
        start_time = time.time()
        with logfire.span("state.find_state", target=str(y), generators=len(p.generators)):
            forced, _ = StateService.forced_set(p, y)
            names, rows = StateService.state_rows(p, forced, y)
            result = StateService._solve(names, rows)
            fm_ok, steps = StateService._cross_check(names, rows)
            lp_ok = result.status != LPStatus.INFEASIBLE
            agrees = None if fm_ok is None else fm_ok == lp_ok
            if agrees is False:
                logfire.error("state.find_state engines disagree", target=str(y), simplex=lp_ok, elimination=fm_ok)
            ambiguous = StateService._ambiguous(p, forced, y, budget)
            if result.status == LPStatus.INFEASIBLE:
                if not check_farkas(rows, result.multipliers, len(names)):
                    logfire.error("state.find_state produced an invalid Farkas certificate", target=str(y))
                outcome = LPOutcome(
                    status=LPStatusKind.INFEASIBLE,
                    farkas=FarkasCertificate(
                        target=y, forced=tuple(names), multipliers=tuple(fmt(m) for m in result.multipliers)
                    ),
                    forced=tuple(names),
                    budget_ambiguous=ambiguous,
                    elimination_agrees=agrees,
                    elimination=steps,
                    pivots=result.pivots,
                )
            else:
                outcome = LPOutcome(
                    status=LPStatusKind.FEASIBLE,
                    state=StateService._extend(p, names, result.point),
                    forced=tuple(names),
                    budget_ambiguous=ambiguous,
                    elimination_agrees=agrees,
                    elimination=steps,
                    pivots=result.pivots,
                )
            logfire.info(
                "state.find_state finished",
                status=outcome.status.value,
                execution_time=round(time.time() - start_time, 4),
            )
            return outcome

    @staticmethod
    def sup_state_value(p: MonoidPresentation, x: Element, y: Element) -> LPOutcome:
        """Maximise ν(x) over states with ν(y) = 1."""
        StateService._check_target(p, x, y)
        if y.is_zero():
            raise zero_element("sup_state_value")
        with logfire.span("state.sup_state_value", objective=str(x), target=str(y)):
            forced, _ = StateService.forced_set(p, y)
            names, rows = StateService.state_rows(p, forced, y)
            if any(g not in forced for g in x.support()):
                feasible = StateService._solve(names, rows)
                if feasible.status == LPStatus.INFEASIBLE:
                    return LPOutcome(
                        status=LPStatusKind.INFEASIBLE,
                        farkas=FarkasCertificate(
                            target=y, forced=tuple(names), multipliers=tuple(fmt(m) for m in feasible.multipliers)
                        ),
                        forced=tuple(names),
                    )
                return LPOutcome(
                    status=LPStatusKind.UNBOUNDED,
                    optimum=fmt(INF),
                    state=StateService._extend(p, names, feasible.point),
                    forced=tuple(names),
                )
            result = StateService._solve(names, rows, objective=x)
            if result.status == LPStatus.INFEASIBLE:
                return LPOutcome(
                    status=LPStatusKind.INFEASIBLE,
                    farkas=FarkasCertificate(
                        target=y, forced=tuple(names), multipliers=tuple(fmt(m) for m in result.multipliers)
                    ),
                    forced=tuple(names),
                    pivots=result.pivots,
                )
            if result.status == LPStatus.UNBOUNDED:
                logfire.error("state.sup_state_value unbounded on the forced set", objective=str(x))
                return LPOutcome(
                    status=LPStatusKind.UNBOUNDED,
                    optimum=fmt(INF),
                    state=StateService._extend(p, names, result.point),
                    forced=tuple(names),
                    pivots=result.pivots,
                )
            objective = [Fraction(x.coefficient(g)) for g in names]
            if not check_upper_bound(rows, result.multipliers, objective, result.optimum):
                logfire.error("state.sup_state_value produced an invalid dual bound", objective=str(x))
            return LPOutcome(
                status=LPStatusKind.FEASIBLE,
                optimum=fmt(result.optimum),
                state=StateService._extend(p, names, result.point),
                dual=DualBound(
                    objective=x,
                    target=y,
                    forced=tuple(names),
                    multipliers=tuple(fmt(m) for m in result.multipliers),
                    bound=fmt(result.optimum),
                ),
                forced=tuple(names),
                pivots=result.pivots,
            )

    @staticmethod
    def _min_p(
        p: MonoidPresentation, left: Element, y: Element, extra: Element, cap: int, budget: SearchBudget
    ) -> Optional[int]:
        """Smallest p <= cap with left <= p·y + extra, by bisection (monotone in p)."""
        def proved(k: int) -> bool:
            return SearchService.leq_search(p, left, y.scale(k) + extra, budget).derivation is not None

        if not proved(cap):
            return None
        lo, hi = 0, cap
        while lo < hi:
            mid = (lo + hi) // 2
            if proved(mid):
                hi = mid
            else:
                lo = mid + 1
        return lo

    @staticmethod
    def extend_state(
        p: MonoidPresentation,
        s0: Sequence[Element],
        x: Element,
        y: Element,
        budget: SearchBudget,
        pq_cap: Optional[int] = None,
        k_cap: Optional[int] = None,
    ) -> StateExtension:
        """
        Extend ν(y) = 1 one element of ``s0`` at a time by the infimum over
        certificates q·y + k·u <= p·y + B (B a sum of earlier elements), then
        verify monotonicity on bounded combinations.
        """
        pq_cap = pq_cap or analysis_config.extension_pq_cap
        k_cap = k_cap or analysis_config.extension_k_cap
        StateService._check_target(p, x, y, *s0)
        if y.is_zero():
            raise zero_element("extend_state")
        if y not in s0 or x not in s0:
            raise premise_violated("extend_state", "x and y must belong to s0")
        forced, _ = StateService.forced_set(p, y)
        for u in s0:
            if any(g not in forced for g in u.support()):
                raise premise_violated(
                    "extend_state", "every element of s0 must lie in ⟨y⟩", {"element": str(u)}
                )
        for n in range(1, budget.n_max + 1):
            if SearchService.leq_search(p, y.scale(n + 1), y.scale(n), budget).derivation is not None:
                raise PreconditionException(
                    message=f"y is paradoxical: {n + 1}·y <= {n}·y",
                    error_code=ErrorCode.PARADOX_DETECTED,
                    witness={"n": n, "y": str(y)},
                )

        with logfire.span("state.extend_state", size=len(s0), pq_cap=pq_cap, k_cap=k_cap):
            values: Dict[Element, ExtRational] = {y: Fraction(1)}
            certificates: List[ExtensionCertificate] = []
            order = [y] + [u for u in s0 if u != y]
            evidence: Optional[str] = None
            complete = True
            processed: List[Element] = []
            for u in order[1:]:
                best: Optional[Fraction] = None
                best_cert: Optional[ExtensionCertificate] = None
                for mask in product((0, 1), repeat=len(processed)):
                    extra = Element()
                    for bit, b in zip(mask, processed):
                        if bit:
                            extra = extra + b
                    extra_value = sum((values[b] for bit, b in zip(mask, processed) if bit), Fraction(0))
                    if extra_value is INF:
                        continue
                    for k in range(1, k_cap + 1):
                        for q in range(0, pq_cap + 1):
                            left = y.scale(q) + u.scale(k)
                            pmin = StateService._min_p(p, left, y, extra, pq_cap, budget)
                            if pmin is None:
                                continue
                            value = Fraction(pmin - q, 1) / k + extra_value / k
                            if best is None or value < best:
                                best = value
                                best_cert = ExtensionCertificate(
                                    element=u, q=q, k=k, p=pmin, extra=extra, value=fmt(value)
                                )
                if best is None:
                    complete = False
                    values[u] = INF
                    continue
                if best < 0:
                    evidence = f"negative extension value {fmt(best)} for {u}"
                    logfire.warn("state.extend_state paradox evidence", element=str(u), value=fmt(best))
                values[u] = best
                certificates.append(best_cert)
                processed.append(u)

            checked, consistent = StateService._check_monotone(p, list(values), values, budget)
            if not consistent and evidence is None:
                evidence = "bounded combination violates monotonicity"
            x_value = StateService._infimum_for(p, x, y, pq_cap, k_cap, budget)
            return StateExtension(
                order=tuple(order),
                values=tuple((str(u), fmt(v)) for u, v in values.items()),
                certificates=tuple(certificates),
                combinations_checked=checked,
                consistent=consistent and evidence is None,
                paradox_evidence=evidence,
                x_value=None if x_value is None else fmt(x_value),
                complete=complete,
            )

    @staticmethod
    def _infimum_for(
        p: MonoidPresentation, x: Element, y: Element, pq_cap: int, k_cap: int, budget: SearchBudget
    ) -> Optional[Fraction]:
        """inf (p - q)/k over q·y + k·x <= p·y within the caps."""
        best: Optional[Fraction] = None
        for k in range(1, k_cap + 1):
            for q in range(0, pq_cap + 1):
                pmin = StateService._min_p(p, y.scale(q) + x.scale(k), y, Element(), pq_cap, budget)
                if pmin is None:
                    continue
                value = Fraction(pmin - q, k)
                if best is None or value < best:
                    best = value
        return best

    @staticmethod
    def _check_monotone(
        p: MonoidPresentation,
        elements: List[Element],
        values: Dict[Element, ExtRational],
        budget: SearchBudget,
        multiplicity: int = 2,
    ) -> Tuple[int, bool]:
        """Σ a_i <= Σ b_j ⇒ Σ ν(a_i) <= Σ ν(b_j) over multisets with bounded multiplicity."""
        small = SearchBudget(n_max=budget.n_max, coeff_cap=budget.coeff_cap, node_cap=min(budget.node_cap, 20_000))
        combos = list(product(range(multiplicity + 1), repeat=len(elements)))
        checked = 0

        def total(counts) -> Tuple[Element, ExtRational]:
            element, value = Element(), Fraction(0)
            for c, u in zip(counts, elements):
                if c:
                    element = element + u.scale(c)
                    value = INF if values[u] is INF or value is INF else value + c * values[u]
            return element, value

        for left in combos:
            a, va = total(left)
            if a.is_zero():
                continue
            for right in combos:
                b, vb = total(right)
                if va is INF or (vb is not INF and va <= vb):
                    continue
                checked += 1
                if SearchService.leq_search(p, a, b, small).derivation is not None:
                    return checked, False
        return checked, True

    @staticmethod
    def has_nontrivial_state(p: MonoidPresentation, budget: SearchBudget):
        """PROVED with a state finite and nonzero on some generator; REFUTED when every generator is paradoxical."""
        claim = Claim(kind=ClaimKind.NONTRIVIAL_STATE)
        with logfire.span("state.has_nontrivial_state", generators=len(p.generators)):
            parts = []
            for g in p.generators:
                unit = Element.generator(g)
                outcome = StateService.find_state(p, unit)
                if outcome.status == LPStatusKind.FEASIBLE:
                    logfire.info("state.has_nontrivial_state proved", generator=g)
                    return Judgement(claim=claim, verdict=Verdict.PROVED, certificate=outcome.state)
                derivation = None
                for n in range(1, budget.n_max + 1):
                    derivation = SearchService.leq_search(p, unit.scale(n + 1), unit.scale(n), budget).derivation
                    if derivation is not None:
                        break
                parts.append((g, derivation if derivation is not None else outcome.farkas))
            return Judgement(
                claim=claim,
                verdict=Verdict.REFUTED,
                certificate=composite(parts),
                notes=("every generator is paradoxical, so every state takes only the values 0 and ∞",),
            )
