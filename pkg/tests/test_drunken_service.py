from fractions import Fraction
from pathlib import Path

import pytest

from app.exceptions import ValidationException
from app.models.graph_models import TraceKind
from app.parsers.input_parser import InputParser
from app.services.drunken_service import DrunkenService, fibonacci
from app.utils.qphi import QPhi, parse_qphi

CORPUS = Path(__file__).resolve().parent.parent / "app" / "corpus"


def layered(name: str):
    return InputParser.parse_file(str(CORPUS / name)).value


def test_fibonacci():
    assert [fibonacci(n) for n in range(10)] == [0, 1, 1, 2, 3, 5, 8, 13, 21, 34]
    with pytest.raises(ValueError):
        fibonacci(-1)


def test_cassini_identity_holds():
    assert DrunkenService.cassini_check(40)


def test_ladder_shape():
    graph = DrunkenService.drunken_graph(3)
    assert graph.levels[0] == ("a1", "b1")
    assert graph.depth == 3
    assert ("a1", "b1") in graph.blocks[0]
    with pytest.raises(ValidationException):
        DrunkenService.drunken_graph(0)


def test_exact_trace_satisfies_identities_to_depth_50():
    solution = DrunkenService.drunken_trace(50)
    assert solution.kind == TraceKind.EXACT
    values = {v: parse_qphi(x) for v, x in solution.values}
    assert values["b1"] == QPhi(1)
    for k in range(1, 51):
        assert values[f"a{k}"] == values[f"a{k + 1}"] + values[f"b{k + 1}"]
        assert values[f"b{k}"] == values[f"a{k}"] + values[f"b{k + 1}"]
    assert all(x.sign() > 0 for x in values.values())


def test_tail_mass_below_b1_is_tiny_but_positive():
    partial = DrunkenService.partial_sums(50)[-1]
    gap = QPhi(1) - partial
    assert gap.sign() > 0
    lo, hi = gap.bracket(40)
    assert 0 < hi < Fraction(1, 10**15)


def test_normalised_trace_starts_at_phi_power():
    solution = DrunkenService.drunken_trace_normalized(5)
    values = dict(solution.values)
    assert parse_qphi(values["a1"]) == QPhi.phi() ** -3
    assert parse_qphi(values["b1"]) == QPhi.phi() ** -2


def test_ratio_interval_width_follows_cassini():
    lo, hi = DrunkenService.ratio_interval(20)
    assert hi - lo == Fraction(1, fibonacci(40) * fibonacci(39))
    assert QPhi(lo) < QPhi.phi() < QPhi(hi)


def test_enclosures_nest_and_match_the_ratio_interval():
    solution = DrunkenService.layered_trace_enclosure(DrunkenService.drunken_graph(1), 12)
    assert solution.kind == TraceKind.ENCLOSURE
    assert solution.normalized_vertex == "a1"
    b1 = [i for i in solution.intervals if i.vertex == "b1"]
    assert [i.depth for i in b1] == list(range(1, 13))
    for outer, inner in zip(b1, b1[1:]):
        assert Fraction(outer.lo) <= Fraction(inner.lo)
        assert Fraction(inner.hi) <= Fraction(outer.hi)
    for interval in b1:
        assert (Fraction(interval.lo), Fraction(interval.hi)) == DrunkenService.ratio_interval(interval.depth)


def test_depth_twenty_enclosure_width():
    solution = DrunkenService.layered_trace_enclosure(DrunkenService.drunken_graph(1), 20)
    last = next(i for i in solution.intervals if i.vertex == "b1" and i.depth == 20)
    assert Fraction(last.hi) - Fraction(last.lo) == Fraction(1, fibonacci(40) * fibonacci(39))


def test_infeasible_layered_graph_stops_at_depth_three():
    graph = layered("infeasible.layered")
    solution = DrunkenService.layered_trace_enclosure(graph, 3)
    assert solution.infeasible_at == 3
    assert max(i.depth for i in solution.intervals) == 2


def test_enclosure_stops_before_running_past_a_finite_input():
    graph = layered("infeasible.layered")
    assert DrunkenService.layered_trace_enclosure(graph, 5).infeasible_at == 3
    with pytest.raises(ValueError):
        graph.extended(5)


def test_ladder_trace_is_constant():
    solution = DrunkenService.layered_trace_enclosure(layered("ladder.layered"), 5)
    assert solution.infeasible_at is None
    assert {(i.lo, i.hi) for i in solution.intervals} == {("1", "1")}


def test_periodic_extension_renames_by_level():
    extended = layered("ladder.layered").extended(3)
    assert extended.levels == (("v1",), ("v2",), ("v3",), ("v4",))
