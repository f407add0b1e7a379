import pytest

from app.exceptions import ValidationException
from app.models.error_models import ErrorCode
from app.models.judgement_models import Verdict
from app.models.monoid_models import Element, SearchBudget
from app.services.monoid_service import MonoidService
from app.services.search_service import SearchService
from app.services.verify_service import VerifyService
from tests.conftest import el, presentation


def test_leq_adding_a_generator_is_an_axiom(free_pair, budget):
    judgement = MonoidService.leq(free_pair, el("a"), el("a + b"), budget)
    assert judgement.verdict == Verdict.PROVED
    assert SearchService.replay(free_pair, judgement.certificate)


def test_leq_refuted_in_free_monoid_by_state(free_pair, budget):
    judgement = MonoidService.leq(free_pair, el("a"), el("b"), budget)
    assert judgement.verdict == Verdict.REFUTED
    assert VerifyService.verify(judgement, free_pair) is None


def test_leq_through_relation():
    p = presentation("a b", "2*a <= b")
    judgement = MonoidService.leq(p, el("2*a + b"), el("2*b"), SearchBudget())
    assert judgement.verdict == Verdict.PROVED
    assert VerifyService.verify(judgement, p) is None


def test_undeclared_generator_is_rejected(free_pair, budget):
    with pytest.raises(ValidationException) as info:
        MonoidService.leq(free_pair, el("c"), el("a"), budget)
    assert info.value.error_code == ErrorCode.UNDECLARED_GENERATOR


def test_cuntz_relation_makes_v_paradoxical_and_properly_infinite(cuntz_presentation, budget):
    v = el("v")
    paradox = MonoidService.is_paradoxical(cuntz_presentation, v, budget)
    assert paradox.verdict == Verdict.PROVED
    assert paradox.claim.n == 1
    proper = MonoidService.is_properly_infinite(cuntz_presentation, v, budget)
    assert proper.verdict == Verdict.PROVED
    for judgement in (paradox, proper):
        assert VerifyService.verify(judgement, cuntz_presentation) is None


def test_paradoxical_needs_nonzero_element(cuntz_presentation, budget):
    with pytest.raises(ValidationException) as info:
        MonoidService.is_paradoxical(cuntz_presentation, Element(), budget)
    assert info.value.error_code == ErrorCode.ZERO_ELEMENT


def test_free_generator_is_not_paradoxical(free_pair, budget):
    judgement = MonoidService.is_paradoxical(free_pair, el("a"), budget)
    assert judgement.verdict == Verdict.REFUTED
    assert VerifyService.verify(judgement, free_pair) is None


def test_ideal_membership(budget):
    p = presentation("a b", "a <= 2*b")
    inside = MonoidService.ideal_membership(p, el("a"), el("b"), budget)
    assert inside.verdict == Verdict.PROVED
    outside = MonoidService.ideal_membership(p, el("b"), el("a"), budget)
    assert outside.verdict == Verdict.REFUTED
    for judgement in (inside, outside):
        assert VerifyService.verify(judgement, p) is None


def test_free_monoid_is_not_simple(free_pair, budget):
    judgement = MonoidService.is_simple(free_pair, budget)
    assert judgement.verdict == Verdict.REFUTED
    assert VerifyService.verify(judgement, free_pair) is None


def test_single_paradoxical_generator_is_simple(cuntz_presentation, budget):
    assert MonoidService.is_simple(cuntz_presentation, budget).verdict == Verdict.PROVED
    assert MonoidService.is_order_unit(cuntz_presentation, el("v"), budget).verdict == Verdict.PROVED


def test_quotient_adds_zero_relations(free_pair):
    quotient = MonoidService.quotient_by_ideal(free_pair, [el("a")])
    assert quotient.generators == free_pair.generators
    assert len(quotient.relations) == 1
    assert quotient.relations[0].lhs == el("a")
    assert quotient.relations[0].rhs.is_zero()


def test_quotient_needs_generators(free_pair):
    with pytest.raises(ValidationException):
        MonoidService.quotient_by_ideal(free_pair, [])


def test_quotient_kills_infiniteness(budget):
    p = presentation("a b", "a + b <= a")
    quotient = MonoidService.quotient_by_ideal(p, [el("b")])
    assert MonoidService.leq(quotient, el("b"), Element(), budget).verdict == Verdict.PROVED
    assert MonoidService.is_paradoxical(quotient, el("a"), budget).verdict == Verdict.REFUTED


@pytest.mark.parametrize("n", [2, 3, 5])
def test_cuntz_multiples_are_congruent_modulo_n_minus_one(n, budget):
    p = presentation("v", f"v == {n}*v")
    for k in range(1, n):
        judgement = MonoidService.congruent(p, el(f"{k}*v"), el(f"{k + n - 1}*v"), budget)
        assert judgement.verdict == Verdict.PROVED
    if n > 2:
        apart = MonoidService.congruent(p, el("v"), el("2*v"), budget)
        assert apart.verdict == Verdict.REFUTED
        assert VerifyService.verify(apart, p) is None


def test_brute_force_oracle_agrees_with_leq(budget):
    p = presentation("a b", "2*a <= b")
    oracle = MonoidService.brute_force_leq_oracle(p, el("2*a"), el("b"), budget)
    assert oracle.verdict == Verdict.PROVED
    assert MonoidService.leq(p, el("2*a"), el("b"), budget).verdict == Verdict.PROVED


def test_small_elements_are_sorted_by_size(free_pair):
    small = MonoidService.small_elements(free_pair, max_coefficient=1)
    assert small == [el("b"), el("a"), el("a + b")]


def test_free_monoid_is_almost_unperforated_within_small_pairs(free_pair, budget):
    judgement = MonoidService.check_almost_unperforated(free_pair, budget)
    assert judgement.verdict != Verdict.REFUTED
