"""
Stable domination x <_s y, decided by derivation search on one side and the
state criterion on the other: x <_s y exactly when x ∈ ⟨y⟩ and ν(x) < ν(y)
for every state normalised by ν(y) = 1.
"""

import time
from typing import List, Optional, Tuple

import logfire

from app.exceptions import undeclared_generator, zero_element
from app.models.judgement_models import Claim, ClaimKind, Judgement, Verdict
from app.models.monoid_models import (
    BudgetReport,
    Derivation,
    DerivationStep,
    Element,
    MonoidPresentation,
    SearchBudget,
)
from app.models.state_models import LPStatusKind
from app.services.search_service import SearchService
from app.services.state_service import StateService


class TarskiService:
    """
    Service class for stable domination and paradoxicality via states.
    """

    @staticmethod
    def multiplier_search(
        p: MonoidPresentation, x: Element, y: Element, budget: SearchBudget
    ) -> Tuple[Optional[int], Optional[Derivation], List[BudgetReport]]:
        """First n <= n_max with (n+1)·x <= n·y, and the reports of every attempt."""
        reports = []
        for n in range(1, budget.n_max + 1):
            outcome = SearchService.leq_search(p, x.scale(n + 1), y.scale(n), budget)
            reports.append(outcome.report)
            if outcome.derivation is not None:
                return n, outcome.derivation, reports
        return None, None, reports

    @staticmethod
    def collapse_multiples(paradox: Derivation, m: int, y: Element, start: int) -> List[DerivationStep]:
        """Steps taking start·y down to m·y using (m+1)·y <= m·y, for start >= m."""
        steps: List[DerivationStep] = []
        for j in range(start, m, -1):
            steps.extend(paradox.shifted(y.scale(j - m - 1)).steps)
        return steps

    @staticmethod
    def stable_domination_from_paradox(
        x: Element, y: Element, k: int, membership: Derivation, m: int, paradox: Derivation
    ) -> Derivation:
        """
        Build (m+1)·x <= m·y from x <= k·y and (m+1)·y <= m·y.

        Each copy of x is replaced by k·y, after which (m+1)k·y is collapsed
        to m·y one multiple at a time.
        """
        steps: List[DerivationStep] = []
        for i in range(m + 1):
            rest = x.scale(m - i) + y.scale(k * i)
            steps.extend(membership.shifted(rest).steps)
        top = k * (m + 1)
        steps.extend(TarskiService.collapse_multiples(paradox, m, y, top))
        return Derivation(start=x.scale(m + 1), steps=tuple(steps), end=y.scale(m))

    @staticmethod
    def rordam_tarski(
        p: MonoidPresentation, x: Element, y: Element, budget: SearchBudget
    ) -> Judgement:
        """
        Decide x <_s y.

        Args:
            p: Presentation
            x: Candidate dominated element
            y: Dominating element, nonzero
            budget: Search budget for the multiplier searches

        Returns:
            Judgement: PROVED with a derivation (n+1)·x <= n·y, REFUTED with a
            state (ν(y) finite and ν(x) >= ν(y) > 0, or ν(x) = ∞), else UNKNOWN
        """
        for element in (x, y):
            missing = p.undeclared(element)
            if missing is not None:
                raise undeclared_generator(missing, list(p.generators))
        if y.is_zero():
            raise zero_element("rordam_tarski")

        start_time = time.time()
        with logfire.span("tarski.rordam_tarski", x=str(x), y=str(y), n_max=budget.n_max):
            n, derivation, reports = TarskiService.multiplier_search(p, x, y, budget)
            if derivation is not None:
                logfire.info("tarski.rordam_tarski proved", n=n)
                return Judgement(
                    claim=Claim(kind=ClaimKind.STABLY_DOMINATED, x=x, y=y, n=n),
                    verdict=Verdict.PROVED,
                    certificate=derivation,
                )

            forced, _ = StateService.forced_set(p, y)
            if any(g not in forced for g in x.support()):
                return Judgement(
                    claim=Claim(kind=ClaimKind.STABLY_DOMINATED, x=x, y=y),
                    verdict=Verdict.REFUTED,
                    certificate=StateService.zero_infinity_state(p, forced),
                    notes=("x lies outside the ideal generated by y",),
                )

            sup = StateService.sup_state_value(p, x, y)
            if sup.status == LPStatusKind.INFEASIBLE:
                # y is paradoxical, so every member of ⟨y⟩ is stably dominated by y
                built = TarskiService._via_paradox(p, x, y, budget)
                if built is not None:
                    m, proof = built
                    return Judgement(
                        claim=Claim(kind=ClaimKind.STABLY_DOMINATED, x=x, y=y, n=m),
                        verdict=Verdict.PROVED,
                        certificate=proof,
                        notes=("composed from x ∈ ⟨y⟩ and a paradoxical decomposition of y",),
                    )
                logfire.warn("tarski.rordam_tarski budget exhausted", reason="y paradoxical without derivation")
                return Judgement(
                    claim=Claim(kind=ClaimKind.STABLY_DOMINATED, x=x, y=y),
                    verdict=Verdict.UNKNOWN,
                    certificate=reports[-1],
                    notes=("no state normalises y, but no paradoxical derivation of y fits the budget",),
                )

            optimum = sup.optimum_value
            if optimum is not None and optimum >= 1:
                logfire.info("tarski.rordam_tarski refuted", optimum=sup.optimum)
                return Judgement(
                    claim=Claim(kind=ClaimKind.STABLY_DOMINATED, x=x, y=y),
                    verdict=Verdict.REFUTED,
                    certificate=sup.state,
                    notes=(f"max ν(x) subject to ν(y) = 1 is {sup.optimum}",),
                )

            logfire.warn(
                "tarski.rordam_tarski budget exhausted",
                optimum=sup.optimum,
                execution_time=round(time.time() - start_time, 4),
            )
            return Judgement(
                claim=Claim(kind=ClaimKind.STABLY_DOMINATED, x=x, y=y),
                verdict=Verdict.UNKNOWN,
                certificate=reports[-1],
                notes=(f"max ν(x) subject to ν(y) = 1 is {sup.optimum} < 1; no derivation within budget",),
            )

    @staticmethod
    def _via_paradox(
        p: MonoidPresentation, x: Element, y: Element, budget: SearchBudget
    ) -> Optional[Tuple[int, Derivation]]:
        m, paradox, _ = TarskiService.multiplier_search(p, y, y, budget)
        if paradox is None:
            return None
        membership = StateService.ideal_derivation(p, x, y)
        if membership is None:
            return None
        k, derivation = membership
        return m, TarskiService.stable_domination_from_paradox(x, y, k, derivation, m, paradox)
