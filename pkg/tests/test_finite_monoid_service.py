import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from app.models.judgement_models import Verdict
from app.models.monoid_models import FiniteMonoid
from app.services.finite_monoid_service import FiniteMonoidService
from app.services.monoid_service import MonoidService
from app.services.search_service import SearchService
from app.services.state_service import StateService
from app.services.verify_service import VerifyService
from tests.conftest import ZON, el, parse

ZINF = """
kind: finite-monoid
[elements] zero inf
[add]
zero inf
inf inf
"""


def product_table(left: FiniteMonoid, right: FiniteMonoid) -> FiniteMonoid:
    pairs = [(a, b) for a in range(left.size) for b in range(right.size)]
    index = {pair: k for k, pair in enumerate(pairs)}
    return FiniteMonoid(
        elements=tuple(left.elements[a] + right.elements[b] for a, b in pairs),
        add=tuple(
            tuple(index[(left.sum(a, c), right.sum(b, d))] for c, d in pairs) for a, b in pairs
        ),
        zero=index[(left.zero, right.zero)],
        leq=tuple(tuple(left.le(a, c) and right.le(b, d) for c, d in pairs) for a, b in pairs),
    )


def with_infinity(m: FiniteMonoid) -> FiniteMonoid:
    """Adjoin an absorbing top element."""
    top = m.size
    return FiniteMonoid(
        elements=m.elements + (f"inf{top}",),
        add=tuple(row + (top,) for row in m.add) + ((top,) * (top + 1),),
        zero=m.zero,
        leq=tuple(row + (True,) for row in m.leq) + (tuple(a == top for a in range(top + 1)),),
    )


SMALL_TABLES = {size: list(FiniteMonoidService.enumerate_finite_monoids(size)) for size in (2, 3)}
FOUR = st.one_of(
    st.builds(product_table, st.sampled_from(SMALL_TABLES[2]), st.sampled_from(SMALL_TABLES[2])),
    st.sampled_from(SMALL_TABLES[3]).map(with_infinity),
)
FIVE = FOUR.map(with_infinity)
SIX = st.one_of(
    st.builds(product_table, st.sampled_from(SMALL_TABLES[2]), st.sampled_from(SMALL_TABLES[3])),
    FIVE.map(with_infinity),
)


def test_zon_one_is_paradoxical_with_multiplier_two(zon, budget):
    judgement = MonoidService.is_paradoxical(zon, el("one"), budget)
    assert judgement.verdict == Verdict.PROVED
    assert judgement.claim.n == 2
    assert VerifyService.verify(judgement, zon) is None


def test_zon_one_is_not_properly_infinite(zon, budget):
    judgement = MonoidService.is_properly_infinite(zon, el("one"), budget)
    assert judgement.verdict == Verdict.REFUTED
    assert VerifyService.verify(judgement, zon) is None


def test_zon_fails_plain_paradoxes_at_one(zon):
    holds, witness = FiniteMonoidService.check_plain_paradoxes(zon)
    assert not holds
    assert witness == "one"


def test_zon_is_simple_and_not_purely_infinite(zon, budget):
    assert MonoidService.is_simple(zon, budget).verdict == Verdict.PROVED
    purely, witness = FiniteMonoidService.check_purely_infinite(zon)
    assert not purely
    assert witness == "one"


def test_zinf_is_purely_infinite():
    m = parse(ZINF).value
    assert FiniteMonoidService.check_purely_infinite(m) == (True, None)
    assert FiniteMonoidService.check_plain_paradoxes(m) == (True, None)
    assert FiniteMonoidService.is_simple(m)


def test_algebraic_order_of_zon(zon):
    zero, one, inf = (zon.index(n) for n in ("zero", "one", "inf"))
    assert zon.le(zero, one) and zon.le(one, inf)
    assert not zon.le(inf, one)
    assert FiniteMonoidService.is_conical(zon)


def test_infiniteness_ideal_of_zon(zon):
    one, inf = zon.index("one"), zon.index("inf")
    assert FiniteMonoidService.compute_infiniteness_ideal(zon, one) == {zon.zero}
    assert FiniteMonoidService.compute_infiniteness_ideal(zon, inf) == set(range(zon.size))
    assert FiniteMonoidService.is_ideal(zon, FiniteMonoidService.ideal(zon, one))


def test_zon_passes_every_structural_check(zon):
    report = FiniteMonoidService.check_lemmas(zon)
    assert report.all_hold, [c.name for c in report.failed()]


def test_ordered_quotient_of_zon_is_itself(zon):
    quotient = FiniteMonoidService.ordered_quotient(zon)
    assert quotient.size == 3


def test_invalid_table_is_rejected():
    with pytest.raises(ValidationError):
        FiniteMonoid(elements=("zero", "a"), add=((0, 1), (0, 1)), zero=0, leq=((True, True), (False, True)))


def test_exported_presentation_agrees_with_table(zon, budget):
    p = FiniteMonoidService.export_finite_monoid(zon)
    assert set(p.generators) <= set(zon.elements)
    judgement = MonoidService.leq(p, el("one + one"), el("inf"), budget)
    assert judgement.verdict == Verdict.PROVED
    assert SearchService.replay(p, judgement.certificate)


@pytest.mark.parametrize("size", [1, 2, 3, 4])
def test_enumerated_monoids_are_valid_and_pass_checks(size):
    count = 0
    for m in FiniteMonoidService.enumerate_finite_monoids(size):
        count += 1
        report = FiniteMonoidService.check_lemmas(m)
        assert report.all_hold, (m.elements, m.add, m.leq, [c.name for c in report.failed()])
    assert count >= 1


@pytest.mark.parametrize("size", [2, 3, 4])
def test_tarski_dichotomy_on_enumerated_tables(size):
    for m in FiniteMonoidService.enumerate_finite_monoids(size):
        for a in FiniteMonoidService.nonzero_classes(m):
            paradoxical = FiniteMonoidService.is_paradoxical(m, a)
            state = FiniteMonoidService.normalising_state(m, a)
            assert paradoxical != (state is not None), (m.add, m.leq, m.elements[a])


def test_table_state_matches_presentation_lp(zon):
    p = FiniteMonoidService.export_finite_monoid(zon)
    outcome = StateService.find_state(p, el("one"))
    assert outcome.status.value == "INFEASIBLE"
    assert FiniteMonoidService.normalising_state(zon, zon.index("one")) is None


@settings(max_examples=40, deadline=None)
@given(st.one_of(FIVE, SIX))
def test_tarski_dichotomy_on_tables_of_five_and_six(m):
    assert m.size in (5, 6)
    report = FiniteMonoidService.check_lemmas(m)
    assert report.all_hold, (m.elements, [c.name for c in report.failed()])
    for a in FiniteMonoidService.nonzero_classes(m):
        paradoxical = FiniteMonoidService.is_paradoxical(m, a)
        assert paradoxical != (FiniteMonoidService.normalising_state(m, a) is not None), (m.add, m.elements[a])


@pytest.mark.parametrize("text", [ZON, ZINF])
def test_rordam_tarski_agrees_with_tables_on_every_pair(text, budget):
    m = parse(text).value
    p = FiniteMonoidService.export_finite_monoid(m)
    for a in range(m.size):
        for b in FiniteMonoidService.nonzero_classes(m):
            x, y = FiniteMonoidService.unit(m, a), FiniteMonoidService.unit(m, b)
            table = MonoidService.is_stably_dominated(m, x, y, budget)
            derived = MonoidService.is_stably_dominated(p, x, y, budget)
            assert derived.verdict == table.verdict, (m.elements[a], m.elements[b])
            assert VerifyService.verify(derived, p) is None
