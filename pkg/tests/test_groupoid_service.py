import random

import pytest

from app.exceptions import ValidationException
from app.models.error_models import ErrorCode
from app.models.groupoid_models import BFunction, GroupoidModel, PartialBijection
from app.models.judgement_models import Verdict
from app.models.monoid_models import SearchBudget
from app.services.groupoid_service import GroupoidService
from app.services.lattice_service import LatticeService
from app.services.sampling_service import SamplingService
from app.services.verify_service import VerifyService
from tests.conftest import el, parse

PAIR = """
kind: groupoid
[points] p q
[bisections]
t: p->q
"""

ORBIT3 = """
kind: groupoid
[points] p1 p2 p3
[bisections]
t: p1->p2
"""


DISJOINT = """
kind: groupoid
[points] a b
[bisections]
ia: a->a
ib: b->b
"""


@pytest.fixture
def pair() -> GroupoidModel:
    return parse(PAIR).value


@pytest.fixture
def orbit3() -> GroupoidModel:
    return parse(ORBIT3).value


def test_closure_contains_inverses_and_unit_opens(pair):
    t = PartialBijection(pairs=(("p", "q"),))
    assert t in pair.bisections
    assert t.inverse() in pair.bisections
    assert PartialBijection.identity(["p", "q"]) in pair.bisections
    assert pair.opens == ((), ("p",), ("q",), ("p", "q"))


def test_generator_outside_points_is_rejected():
    with pytest.raises(ValidationException) as info:
        GroupoidService.close_inverse_semigroup(["p"], [PartialBijection(pairs=(("p", "z"),))])
    assert info.value.error_code == ErrorCode.INVALID_ACTION


def test_points_of_one_orbit_are_equidecomposable(pair, budget):
    judgement = GroupoidService.sim_G(pair, el("p"), el("q"), budget)
    assert judgement.verdict == Verdict.PROVED
    assert VerifyService.verify(judgement, pair) is None


def test_unequal_orbit_mass_refutes_equidecomposability(pair, budget):
    judgement = GroupoidService.sim_G(pair, el("p"), el("2*q"), budget)
    assert judgement.verdict == Verdict.REFUTED
    assert judgement.certificate.lhs_total == 1
    assert judgement.certificate.rhs_total == 2


def test_subequivalence(pair, budget):
    assert GroupoidService.precsim_B(pair, el("p"), el("q"), budget).verdict == Verdict.PROVED
    refuted = GroupoidService.precsim_B(pair, el("p + q"), el("q"), budget)
    assert refuted.verdict == Verdict.REFUTED
    assert VerifyService.verify(refuted, pair) is None


def test_covering_criterion_matches_subequivalence(pair, budget):
    assert GroupoidService.precsim_criterion(pair, el("p"), el("q"), budget).verdict == Verdict.PROVED
    assert GroupoidService.precsim_criterion(pair, el("p + q"), el("q"), budget).verdict == Verdict.REFUTED


def test_type_semigroup_order_finds_slack(pair, budget):
    judgement = GroupoidService.type_semigroup_leq(pair, el("p"), el("2*q"), budget)
    assert judgement.verdict == Verdict.PROVED
    assert judgement.certificate.slack is not None
    assert VerifyService.verify(judgement, pair) is None


def test_function_on_unknown_point_is_rejected(pair, budget):
    with pytest.raises(ValidationException):
        GroupoidService.sim_G(pair, el("z"), el("q"), budget)


def test_sigma_sums_over_orbits(orbit3):
    sigma = GroupoidService.sigma_map(orbit3, el("2*p1 + p3"))
    assert sigma.as_dict() == {("p1", "p2"): 2, ("p3",): 1}


def test_fixed_point_breaks_minimality(orbit3, budget):
    structure = GroupoidService.invariant_subsets_and_ideals(orbit3, budget)
    assert structure.orbits == (("p1", "p2"), ("p3",))
    assert len(structure.invariant_opens) == 4
    assert not structure.minimal
    assert structure.ideals == ((), ("U_p1", "U_p2", "U_p1_p2"))
    assert structure.ideal_enumeration_saturated
    assert structure.ideals_match_invariant_opens


def test_pair_groupoid_is_minimal(pair, budget):
    structure = GroupoidService.invariant_subsets_and_ideals(pair, budget)
    assert structure.minimal
    assert structure.simple_verdict != Verdict.REFUTED.value


def test_restrict_to_invariant_open(orbit3):
    rest = GroupoidService.restrict_to_invariant(orbit3, ["p1", "p2"])
    assert rest.points == ("p3",)


@pytest.mark.parametrize("removed", [["p1"], ["p3"]])
def test_restrict_needs_invariant_open(orbit3, removed):
    with pytest.raises(ValidationException) as info:
        GroupoidService.restrict_to_invariant(orbit3, removed)
    assert info.value.error_code == ErrorCode.NOT_INVARIANT


@pytest.mark.parametrize("f, g", [("p", "q"), ("p + q", "q"), ("q", "p")])
def test_stabilisation_preserves_subequivalence(pair, budget, f, g):
    stabilized = GroupoidService.stabilize(pair, 2)
    assert len(stabilized.model.points) == 4
    x, y = el(f), el(g)
    assert stabilized.lower(stabilized.lift(x)) == x
    original = GroupoidService.precsim_B(pair, x, y, budget)
    lifted = GroupoidService.precsim_B(stabilized.model, stabilized.lift(x), stabilized.lift(y), budget)
    assert original.verdict == lifted.verdict


def test_stabilize_rejects_zero_copies(pair):
    with pytest.raises(ValidationException):
        GroupoidService.stabilize(pair, 0)


def test_orbit_weights_induce_states(pair):
    cone = GroupoidService.invariant_weight_cone(pair)
    assert cone.rays == ((("p", 1), ("q", 1)),)
    assert cone.rays_induce_states
    assert cone.lp_state is not None
    assert cone.lp_state_orbit_constant


def test_exported_presentation_identifies_moved_opens(pair):
    presentation = GroupoidService.export_presentation(pair)
    assert presentation.generators == ("U_p", "U_q", "U_p_q")
    assert GroupoidService.to_presentation_element(pair, el("p + q")) == el("U_p_q")


@pytest.mark.parametrize("seed", range(25))
def test_random_models_witnesses_replay(seed, budget):
    rng = random.Random(seed)
    model = SamplingService.random_groupoid_model(rng)
    indicators = SamplingService.open_indicators(model)
    for f, g in SamplingService.pairs(indicators)[:12]:
        judgement = GroupoidService.sim_G(model, f, g, budget)
        if judgement.verdict != Verdict.PROVED:
            continue
        b = BFunction(terms=tuple(PartialBijection(pairs=t) for t in judgement.certificate.terms))
        assert GroupoidService.from_lsc(GroupoidService.s_star(model, b)) == f
        assert GroupoidService.from_lsc(GroupoidService.r_star(model, b)) == g
        assert GroupoidService.type_semigroup_leq(model, f, g, budget).verdict == Verdict.PROVED


def test_stabilized_bisections_are_closed(pair):
    stabilized = GroupoidService.stabilize(pair, 2).model
    members = set(stabilized.bisections)
    assert len(members) == (len(pair.bisections) - 1) * 4 + 1
    for a in stabilized.bisections:
        assert a.inverse() in members
        for b in stabilized.bisections:
            assert a.after(b) in members
    assert len(stabilized.opens) == len(pair.opens) ** 2


@pytest.mark.parametrize("seed", range(20))
def test_random_models_stabilize_at_three_copies(seed):
    budget = SearchBudget(node_cap=50_000)
    model = SamplingService.random_groupoid_model(random.Random(seed))
    stabilized = GroupoidService.stabilize(model, 3)
    assert len(stabilized.model.points) == 3 * len(model.points)
    assert len(stabilized.model.bisections) == (len(model.bisections) - 1) * 9 + 1
    for f, g in SamplingService.pairs(SamplingService.open_indicators(model))[:6]:
        original = GroupoidService.precsim_B(model, f, g, budget)
        lifted = GroupoidService.precsim_B(stabilized.model, stabilized.lift(f), stabilized.lift(g), budget)
        if Verdict.UNKNOWN in (original.verdict, lifted.verdict):
            continue
        assert original.verdict == lifted.verdict


@pytest.mark.parametrize("seed", range(25))
def test_proved_subequivalence_respects_orbit_sums(seed, budget):
    model = SamplingService.random_groupoid_model(random.Random(seed))
    for f, g in SamplingService.pairs(SamplingService.open_indicators(model)):
        if GroupoidService.precsim_B(model, f, g, budget).verdict != Verdict.PROVED:
            continue
        below = LatticeService.largest_way_below(model.space(), GroupoidService.as_lsc(model, f))
        lhs = GroupoidService.sigma_map(model, GroupoidService.from_lsc(below)).as_dict()
        rhs = GroupoidService.sigma_map(model, g).as_dict()
        assert all(lhs[orbit] <= rhs[orbit] for orbit in lhs)


def test_ideals_are_enumerated_from_the_presentation(budget):
    presentation = GroupoidService.export_presentation(parse(DISJOINT).value)
    ideals, saturated = GroupoidService.presentation_ideals(presentation, budget)
    assert saturated
    assert set(ideals) == {(), ("U_a",), ("U_b",), ("U_a", "U_b", "U_a_b")}


def test_ideal_enumeration_cap_marks_result_unsaturated(budget):
    presentation = GroupoidService.export_presentation(parse(DISJOINT).value)
    ideals, saturated = GroupoidService.presentation_ideals(presentation, budget, cap=1)
    assert not saturated
    assert len(ideals) == 2
