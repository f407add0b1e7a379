import random

import pytest
from hypothesis import given, settings, strategies as st

from app.exceptions import BudgetExceededException, PreconditionException, ValidationException
from app.models.error_models import ErrorCode
from app.models.lattice_models import FiniteSpace
from app.services.lattice_service import LatticeService
from app.services.sampling_service import SamplingService
from tests.conftest import parse

THREE = """
kind: space
[points] p q r
[basis]
p
p q
r
"""


@pytest.fixture
def three() -> FiniteSpace:
    return parse(THREE).value


def test_generated_space_is_closed_under_union_and_intersection(three):
    assert three.is_open(["p", "r"])
    assert three.is_open(["p", "q", "r"])
    assert not three.is_open(["q"])
    assert three.closure(["p"]) == frozenset({"p", "q"})
    assert three.neighbourhood("q") == frozenset({"p", "q"})


def test_non_lattice_family_is_rejected():
    with pytest.raises(ValueError):
        FiniteSpace(points=("p", "q", "r"), opens=(("p", "q"), ("q", "r")))


def test_normal_form_is_a_decreasing_chain(three):
    f = LatticeService.normal_form(three, [["p"], ["p", "q"], ["r"]])
    assert f.chain == (("p", "q", "r"), ("p",))
    assert f.values() == {"p": 2, "q": 1, "r": 1}


def test_level_sets_must_be_open(three):
    with pytest.raises(ValidationException):
        LatticeService.from_values(three, {"q": 1})


def test_join_and_meet_are_pointwise(three):
    f = LatticeService.from_values(three, {"p": 2, "q": 1})
    g = LatticeService.from_values(three, {"p": 1, "r": 1})
    join = LatticeService.join(f, g)
    meet = LatticeService.meet(f, g)
    for x in three.points:
        assert join.value(x) == max(f.value(x), g.value(x))
        assert meet.value(x) == min(f.value(x), g.value(x))


def test_way_below_needs_the_closure(three):
    small = LatticeService.from_values(three, {"p": 1})
    pair = LatticeService.from_values(three, {"p": 1, "q": 1})
    assert LatticeService.way_below(three, small, pair)
    assert not LatticeService.way_below(three, small, small)
    h = LatticeService.interpolate(three, small, pair)
    assert LatticeService.way_below(three, small, h)
    assert LatticeService.way_below(three, h, pair)


def test_interpolate_requires_way_below(three):
    small = LatticeService.from_values(three, {"p": 1})
    with pytest.raises(PreconditionException):
        LatticeService.interpolate(three, small, small)


def test_largest_way_below(three):
    pair = LatticeService.from_values(three, {"p": 1, "q": 1})
    inner = LatticeService.largest_way_below(three, pair)
    assert LatticeService.way_below(three, inner, pair)
    assert inner.values() == {"p": 1, "q": 1}


def test_decompose_three_point_space(three):
    ks, vs = [["p"], ["r"]], [["p", "q"], ["r"]]
    decomposition = LatticeService.decompose(three, ks, vs)
    assert LatticeService.check_decomposition(three, ks, vs, decomposition) is None


def test_decompose_premise_violation(three):
    with pytest.raises(PreconditionException) as info:
        LatticeService.decompose(three, [["r"], ["r"]], [["r"]])
    assert info.value.error_code == ErrorCode.PREMISE_VIOLATED


def test_split_way_below_on_discrete_space():
    space = FiniteSpace.discrete(["x", "y"])
    k = LatticeService.from_values(space, {"x": 1, "y": 1})
    f = LatticeService.from_values(space, {"x": 1})
    g = LatticeService.from_values(space, {"y": 1})
    k1, k2 = LatticeService.split_way_below(space, k, f, g)
    assert LatticeService.add(space, k1, k2).values() == {"x": 1, "y": 1}


def test_compare_open_sums(three):
    assert LatticeService.compare_open_sums(three, [["p"], ["r"]], [["p", "q", "r"]])
    assert not LatticeService.compare_open_sums(three, [["p"], ["p"]], [["p", "q"]])


def test_atoms(three):
    assert LatticeService.atoms(three) == [frozenset({"p"}), frozenset({"q"}), frozenset({"r"})]


def test_counting_measure_is_a_dimension_function(three):
    nu = {tuple(sorted(u)): str(len(u)) for u in three.opens}
    report = LatticeService.extend_dimension_function(three, nu)
    assert report.valid
    assert dict(report.atoms)[("q",)] == "1"


def test_non_monotone_set_function_is_rejected(three):
    nu = {tuple(sorted(u)): str(len(u)) for u in three.opens}
    nu[("p", "q")] = "0"
    report = LatticeService.extend_dimension_function(three, nu)
    assert not report.valid
    assert report.violated_axiom


def test_dimension_function_must_cover_every_open(three):
    with pytest.raises(ValidationException):
        LatticeService.extend_dimension_function(three, {(): "0"})


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_random_partition_decompositions_satisfy_postconditions(seed):
    rng = random.Random(seed)
    space = SamplingService.random_partition_space(rng)
    space, ks, vs = SamplingService.random_decompose_case(rng, space)
    decomposition = LatticeService.decompose(space, ks, vs)
    assert LatticeService.check_decomposition(space, ks, vs, decomposition) is None


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_random_general_decompositions_never_break_postconditions(seed):
    rng = random.Random(seed)
    space = SamplingService.random_space(rng)
    space, ks, vs = SamplingService.random_decompose_case(rng, space)
    try:
        decomposition = LatticeService.decompose(space, ks, vs)
    except PreconditionException as e:
        assert e.error_code == ErrorCode.SEPARATION_FAILED
        return
    assert LatticeService.check_decomposition(space, ks, vs, decomposition) is None


STUCK = FiniteSpace(
    points=("x1", "x2", "x3", "x4"),
    opens=((), ("x2", "x4"), ("x1", "x2", "x4"), ("x2", "x3", "x4"), ("x1", "x2", "x3", "x4")),
)


def test_decompose_searches_when_peeling_gets_stuck():
    ks, vs = [STUCK.points], [["x1", "x2", "x4"], STUCK.points]
    decomposition = LatticeService.decompose(STUCK, ks, vs)
    assert decomposition.pieces == (((), STUCK.points),)
    assert decomposition.sigma == ()
    assert LatticeService.check_decomposition(STUCK, ks, vs, decomposition) is None


def test_decompose_search_cap_is_reported():
    with pytest.raises(BudgetExceededException) as info:
        LatticeService.decompose(STUCK, [STUCK.points], [["x1", "x2", "x4"], STUCK.points], node_cap=1)
    assert info.value.error_code == ErrorCode.SEARCH_CAP_EXCEEDED


def test_decompose_without_any_separation():
    sierpinski = FiniteSpace(points=("a", "b"), opens=(("a",), ("a", "b")))
    with pytest.raises(PreconditionException) as info:
        LatticeService.decompose(sierpinski, [["a"]], [["a"]])
    assert info.value.error_code == ErrorCode.SEPARATION_FAILED
    decomposition = LatticeService.decompose(sierpinski, [["a"]], [["a"]], closures=False)
    assert decomposition.pieces == ((("a",),),)


def test_neighbourhood_validation_matches_pairwise_closure():
    assert STUCK.neighbourhoods == {
        "x1": frozenset({"x1", "x2", "x4"}),
        "x2": frozenset({"x2", "x4"}),
        "x3": frozenset({"x2", "x3", "x4"}),
        "x4": frozenset({"x2", "x4"}),
    }
    with pytest.raises(ValueError):
        FiniteSpace(points=("a", "b", "c"), opens=(("a",), ("b",)))
