import random
from fractions import Fraction

import pytest

from app.exceptions import PreconditionException, ValidationException
from app.models.error_models import ErrorCode
from app.models.judgement_models import Verdict
from app.models.monoid_models import Element, SearchBudget
from app.models.state_models import LPStatusKind
from app.services.monoid_service import MonoidService
from app.services.sampling_service import SamplingService
from app.services.state_service import StateService
from app.services.tarski_service import TarskiService
from app.services.verify_service import VerifyService
from app.utils.rationals import INF
from tests.conftest import el, presentation


def test_free_monoid_state_sends_other_generators_to_infinity(free_pair):
    outcome = StateService.find_state(free_pair, el("a"))
    assert outcome.status == LPStatusKind.FEASIBLE
    assert outcome.state.value("a") == 1
    assert outcome.state.value("b") is INF
    assert VerifyService.lp_outcome(free_pair, el("a"), outcome) is None


def test_cuntz_relation_has_no_normalised_state(cuntz_presentation):
    outcome = StateService.find_state(cuntz_presentation, el("v"))
    assert outcome.status == LPStatusKind.INFEASIBLE
    assert outcome.farkas is not None
    assert VerifyService.lp_outcome(cuntz_presentation, el("v"), outcome) is None


def test_two_cycle_presentation_state():
    p = presentation("u w", "u == w", "w == u")
    outcome = StateService.find_state(p, el("u"))
    assert outcome.status == LPStatusKind.FEASIBLE
    assert outcome.state.value("u") == 1
    assert outcome.state.value("w") == 1


def test_find_state_rejects_zero(free_pair):
    with pytest.raises(ValidationException) as info:
        StateService.find_state(free_pair, Element())
    assert info.value.error_code == ErrorCode.ZERO_ELEMENT


@pytest.mark.parametrize(
    "relation, optimum",
    [("a <= b", Fraction(1)), ("2*a <= b", Fraction(1, 2))],
)
def test_sup_state_value(relation, optimum):
    p = presentation("a b", relation)
    outcome = StateService.sup_state_value(p, el("a"), el("b"))
    assert outcome.status == LPStatusKind.FEASIBLE
    assert outcome.optimum_value == optimum


def test_sup_state_value_on_paradoxical_target(cuntz_presentation):
    outcome = StateService.sup_state_value(cuntz_presentation, el("v"), el("v"))
    assert outcome.status == LPStatusKind.INFEASIBLE


def test_rordam_tarski_proves_strict_domination(budget):
    p = presentation("a b", "2*a <= b")
    judgement = TarskiService.rordam_tarski(p, el("a"), el("b"), budget)
    assert judgement.verdict == Verdict.PROVED
    assert judgement.claim.n == 1
    assert VerifyService.verify(judgement, p) is None


def test_rordam_tarski_refutes_self_domination_in_free_monoid(free_pair, budget):
    judgement = TarskiService.rordam_tarski(free_pair, el("a"), el("a"), budget)
    assert judgement.verdict == Verdict.REFUTED
    assert VerifyService.verify(judgement, free_pair) is None


def test_rordam_tarski_on_paradoxical_element(cuntz_presentation, budget):
    judgement = TarskiService.rordam_tarski(cuntz_presentation, el("v"), el("v"), budget)
    assert judgement.verdict == Verdict.PROVED
    assert VerifyService.verify(judgement, cuntz_presentation) is None


@pytest.mark.parametrize(
    "relation, s0, expected",
    [
        ("a <= b", ["b", "a"], {"b": Fraction(1), "a": Fraction(1)}),
        ("2*a <= b", ["b", "a"], {"b": Fraction(1), "a": Fraction(1, 2)}),
    ],
)
def test_extension_matches_lp_optimum(relation, s0, expected, budget):
    p = presentation("a b", relation)
    result = StateService.extend_state(p, [el(name) for name in s0], el("a"), el("b"), budget)
    assert result.consistent
    for name, value in expected.items():
        assert result.value_of(el(name)) == value
    sup = StateService.sup_state_value(p, el("a"), el("b"))
    assert result.value_of(el("a")) == sup.optimum_value


def test_extension_of_free_generator(budget):
    p = presentation("a")
    result = StateService.extend_state(p, [el("a")], el("a"), el("a"), budget)
    assert result.value_of(el("a")) == 1


def test_extension_requires_target_in_s0(budget):
    p = presentation("a b", "a <= b")
    with pytest.raises(PreconditionException) as info:
        StateService.extend_state(p, [el("b")], el("a"), el("b"), budget)
    assert info.value.error_code == ErrorCode.PREMISE_VIOLATED


def test_nontrivial_state(cuntz_presentation, budget):
    assert StateService.has_nontrivial_state(cuntz_presentation, budget).verdict == Verdict.REFUTED
    assert StateService.has_nontrivial_state(presentation("a"), budget).verdict == Verdict.PROVED


@pytest.mark.parametrize("seed", range(200))
def test_paradox_and_normalising_state_exclude_each_other(seed):
    budget = SearchBudget(n_max=4, node_cap=20_000)
    p = SamplingService.random_presentation(random.Random(seed))
    for g in p.generators:
        unit = Element.generator(g)
        judgement = MonoidService.is_paradoxical(p, unit, budget)
        feasible = StateService.find_state(p, unit).status == LPStatusKind.FEASIBLE
        if judgement.verdict == Verdict.PROVED:
            assert not feasible, (seed, g)
        elif judgement.verdict == Verdict.REFUTED:
            assert feasible, (seed, g)
        assert VerifyService.verify(judgement, p) is None
