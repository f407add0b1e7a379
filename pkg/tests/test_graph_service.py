from fractions import Fraction
from pathlib import Path

import pytest

from app.exceptions import PreconditionException, ValidationException
from app.models.error_models import ErrorCode
from app.models.graph_models import DichotomyVerdict, Graph
from app.models.judgement_models import Verdict
from app.parsers.input_parser import InputParser
from app.services.graph_service import GraphService
from tests.conftest import CUNTZ2, cuntz, el, parse

CORPUS = Path(__file__).resolve().parent.parent / "app" / "corpus"

BROKEN_COCYCLE = CUNTZ2.strip() + """
[group] e s
[mult]
e s
s e
[eact] s: e1->e2, e2->e1
[cocycle]
s|e1 = s
s|e2 = e
"""


def load(name: str):
    return InputParser.parse_file(str(CORPUS / name))


def load_text(name: str) -> str:
    return (CORPUS / name).read_text()


@pytest.fixture
def cuntz2() -> Graph:
    return parse(CUNTZ2).value


def test_theta_counts_incoming_edges(cuntz2):
    assert GraphService.theta(cuntz2, el("v")) == el("2*v")
    assert GraphService.theta(cuntz2, el("v"), 3) == el("8*v")
    assert GraphService.theta(cuntz2, el("v"), 0) == el("v")


def test_theta_pulls_back_along_a_path():
    graph = parse(load_text("three_cycle.graph")).value
    # e1: u -> v, so the mass at v moves to u
    assert GraphService.theta(graph, el("v")) == el("u")


def test_theta_rejects_negative_exponent(cuntz2):
    with pytest.raises(ValidationException):
        GraphService.theta(cuntz2, el("v"), -1)


def test_theta_rejects_unknown_vertex(cuntz2):
    with pytest.raises(ValidationException) as info:
        GraphService.theta(cuntz2, el("x"))
    assert info.value.error_code == ErrorCode.UNDECLARED_GENERATOR


def test_sim_theta_finds_exponents(cuntz2, budget):
    judgement = GraphService.sim_theta(cuntz2, el("v"), el("2*v"), budget)
    assert judgement.verdict == Verdict.PROVED
    assert (judgement.certificate.p, judgement.certificate.q) == (1, 0)


def test_sim_theta_refuted_by_trace(budget):
    graph = load("disjoint_loops.graph").value
    judgement = GraphService.sim_theta(graph, el("u"), el("w"), budget)
    assert judgement.verdict == Verdict.REFUTED
    values = dict(judgement.certificate.values)
    assert values["u"] != values["w"]


def test_group_element_moves_unit_between_orbits(budget):
    parsed = load("swapped_loops.graph")
    judgement = GraphService.precsim_graph(parsed.value, el("u"), el("w"), parsed.action, budget)
    assert judgement.verdict == Verdict.PROVED
    assert judgement.certificate.units[0].group_element == "s"


def test_without_action_disjoint_loops_do_not_compare(budget):
    graph = load("disjoint_loops.graph").value
    judgement = GraphService.precsim_graph(graph, el("u"), el("w"), None, budget)
    assert judgement.verdict == Verdict.REFUTED


def test_trace_cone_of_cuntz_graph_is_trivial(cuntz2):
    cone = GraphService.graph_trace_cone(cuntz2)
    assert not cone.nontrivial
    assert cone.rays == ()


def test_trace_cone_of_two_cycle_is_one_ray():
    graph = load("two_cycle.graph").value
    cone = GraphService.graph_trace_cone(graph)
    assert cone.rays == ((("u", "1/2"), ("w", "1/2")),)


def test_disjoint_loops_carry_two_rays():
    cone = GraphService.graph_trace_cone(load("disjoint_loops.graph").value)
    assert cone.rays == ((("u", "1"),), (("w", "1"),))


def test_trace_violation():
    graph = load("two_cycle.graph").value
    assert GraphService.trace_violation(graph, {"u": Fraction(1), "w": Fraction(1)}) is None
    assert GraphService.trace_violation(graph, {"u": Fraction(1), "w": Fraction(2)}) is not None


def test_broken_cocycle_is_rejected():
    with pytest.raises(ValidationException) as info:
        parse(BROKEN_COCYCLE)
    assert info.value.error_code == ErrorCode.INVALID_ACTION
    assert info.value.details[0].constraint == "(gh)|_e = g|_{he} h|_e"


def test_default_cocycle_is_self_similar():
    parsed = parse(BROKEN_COCYCLE.split("[cocycle]")[0])
    assert parsed.action is not None
    GraphService.check_action(parsed.value, parsed.action)


def test_quotient_of_swapped_loops_is_one_loop():
    parsed = load("swapped_loops.graph")
    quotient = GraphService.quotient_graph(parsed.value, parsed.action)
    assert quotient.vertices == ("u",)
    assert [e.name for e in quotient.edges] == ["eu"]
    assert GraphService.to_quotient_element(parsed.value, parsed.action, el("u + w")) == el("2*u")


def test_quotient_of_swapped_cuntz_is_cuntz():
    parsed = load("swapped_cuntz.graph")
    presentation = GraphService.export_graph_presentation(parsed.value, parsed.action)
    assert presentation.generators == ("u",)
    assert presentation.relations[0].rhs == el("2*u")


def test_cofinality(cuntz2):
    assert GraphService.is_cofinal(cuntz2) == (True, None)
    cofinal, witness = GraphService.is_cofinal(load("disjoint_loops.graph").value)
    assert not cofinal
    assert witness is not None


def test_cofinality_needs_no_sources():
    graph = Graph(vertices=("a", "b"), edges=())
    with pytest.raises(PreconditionException) as info:
        GraphService.is_cofinal(graph)
    assert info.value.error_code == ErrorCode.SOURCES_PRESENT


def test_gamma_cofinality_on_the_graph_itself():
    parsed = load("swapped_loops.graph")
    assert GraphService.gamma_cofinal_bruteforce(parsed.value, parsed.action)[0]
    assert not GraphService.gamma_cofinal_bruteforce(parsed.value)[0]


def test_cycles_with_entrance(cuntz2):
    cycles = GraphService.cycles_with_entrance(cuntz2)
    assert [c.edges for c in cycles] == [("e1",), ("e2",)]
    assert all(c.has_entrance for c in cycles)
    bare = GraphService.cycles_with_entrance(load("two_cycle.graph").value)
    assert len(bare) == 1
    assert not bare[0].has_entrance


@pytest.mark.parametrize(
    "name, verdict",
    [
        ("cuntz2.graph", DichotomyVerdict.PURELY_INFINITE),
        ("cuntz3.graph", DichotomyVerdict.PURELY_INFINITE),
        ("swapped_cuntz.graph", DichotomyVerdict.PURELY_INFINITE),
        ("swapped_loops.graph", DichotomyVerdict.NOT_APPLICABLE),
        ("three_cycle.graph", DichotomyVerdict.NOT_APPLICABLE),
        ("disjoint_loops.graph", DichotomyVerdict.NOT_APPLICABLE),
    ],
)
def test_classify_finite_graphs(name, verdict):
    parsed = load(name)
    report = GraphService.classify_dichotomy(parsed.value, parsed.action)
    assert report.verdict == verdict
    if verdict == DichotomyVerdict.NOT_APPLICABLE:
        assert report.failed_precondition


def test_cycle_without_entrance_certifies_natural_numbers():
    report = GraphService.classify_dichotomy(load("three_cycle.graph").value)
    assert report.failed_precondition == "every cycle has an entrance"
    *congruences, paradox = report.natural_certificate
    assert [j.verdict for j in congruences] == [Verdict.PROVED, Verdict.PROVED]
    assert paradox.verdict == Verdict.REFUTED
    assert any(note.startswith("W ≅ ℕ: v = 1·u, w = 1·u") for note in report.notes)


def test_natural_certificate_counts_paths_from_the_cycle():
    tail = parse("kind: graph\n[vertices] u a\n[edges]\nl: u -> u\nf1: u -> a\nf2: u -> a\n").value
    report = GraphService.classify_dichotomy(tail)
    assert report.verdict == DichotomyVerdict.NOT_APPLICABLE
    assert report.natural_certificate[0].verdict == Verdict.PROVED
    assert any("a = 2·u" in note for note in report.notes)


def test_classify_drunken_ladder_is_stably_finite():
    report = GraphService.classify_dichotomy(InputParser.builtin("drunken").value, depth=10)
    assert report.verdict == DichotomyVerdict.STABLY_FINITE
    assert report.trace.infeasible_at is None


def test_classify_ladder_layered_input():
    report = GraphService.classify_dichotomy(load("ladder.layered").value, depth=5)
    assert report.verdict == DichotomyVerdict.STABLY_FINITE


@pytest.mark.parametrize("n", [2, 3, 5])
def test_cuntz_presentations_are_single_relations(n):
    presentation = GraphService.export_graph_presentation(parse(cuntz(n)).value)
    assert presentation.relations[0].rhs == el(f"{n}*v")


def test_gamma_trace_spreads_orbit_mass():
    parsed = load("swapped_loops.graph")
    lifted = GraphService.gamma_trace_convert(parsed.value, parsed.action, {"u": Fraction(1)})
    assert lifted == {"u": Fraction(1, 2), "w": Fraction(1, 2)}
    assert GraphService.quotient_trace(parsed.value, parsed.action, lifted) == {"u": Fraction(1)}


def test_quotient_trace_needs_invariant_values():
    parsed = load("swapped_loops.graph")
    with pytest.raises(PreconditionException):
        GraphService.quotient_trace(parsed.value, parsed.action, {"u": Fraction(1), "w": Fraction(2)})
