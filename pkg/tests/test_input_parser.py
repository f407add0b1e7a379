from pathlib import Path

import pytest

from app.exceptions import InputParseException, ValidationException
from app.models.error_models import ErrorCode
from app.models.input_models import InputKind
from app.models.monoid_models import Element, RelationKind
from app.parsers.input_parser import InputParser
from tests.conftest import CUNTZ2, el, parse

CORPUS = Path(__file__).resolve().parent.parent / "app" / "corpus"


def test_monoid_presentation():
    parsed = parse("kind: monoid\n[generators] v\n[relations]\nv == 2*v  # Cuntz relation")
    assert parsed.kind == InputKind.MONOID
    assert parsed.value.generators == ("v",)
    assert len(parsed.value.relations) == 1
    assert parsed.value.relations[0].kind == RelationKind.EQ
    assert parsed.value.relations[0].rhs == el("2*v")


def test_graph_with_parallel_edges():
    parsed = parse(CUNTZ2)
    assert parsed.value.vertices == ("v",)
    assert len(parsed.value.edges) == 2
    assert parsed.action is None


@pytest.mark.parametrize(
    "text, expected",
    [
        ("2*a + b", {"a": 2, "b": 1}),
        ("2a+b", {"a": 2, "b": 1}),
        ("a + a", {"a": 2}),
        ("0", {}),
    ],
)
def test_parse_element(text, expected):
    assert InputParser.parse_element(text) == Element.of(expected)


def test_bad_term_reports_its_column():
    with pytest.raises(InputParseException) as info:
        InputParser.parse_element("a + 2*", line=3)
    assert info.value.line == 3
    assert info.value.column == 5


def test_missing_header():
    with pytest.raises(InputParseException) as info:
        parse("[generators] a")
    assert (info.value.line, info.value.column) == (1, 1)


def test_unknown_kind():
    with pytest.raises(InputParseException) as info:
        parse("kind: banana\n[generators] a")
    assert "unknown kind 'banana'" in info.value.message
    assert info.value.column == 7


def test_undeclared_generator_in_relation_is_located():
    with pytest.raises(InputParseException) as info:
        parse("kind: monoid\n[generators] a\n[relations]\na <= b")
    assert (info.value.line, info.value.column) == (4, 6)


def test_section_must_fit_the_kind():
    with pytest.raises(InputParseException) as info:
        parse("kind: monoid\n[generators] a\n[points] p")
    assert info.value.line == 3


def test_duplicate_section():
    with pytest.raises(InputParseException):
        parse("kind: monoid\n[generators] a\n[generators] b")


def test_relation_needs_an_operator():
    with pytest.raises(InputParseException):
        parse("kind: monoid\n[generators] a\n[relations]\na b")


def test_finite_monoid_with_unknown_entry():
    with pytest.raises(InputParseException):
        parse("kind: finite-monoid\n[elements] zero a\n[add]\nzero a\na b")


def test_finite_monoid_invalid_table():
    with pytest.raises(ValidationException) as info:
        parse("kind: finite-monoid\n[elements] zero a\n[add]\nzero a\nzero a")
    assert info.value.error_code == ErrorCode.INVALID_TABLE


def test_space_opens_must_form_a_lattice():
    with pytest.raises(ValidationException) as info:
        parse("kind: space\n[points] p q r\n[opens]\np q\nq r")
    assert info.value.error_code == ErrorCode.INVALID_SPACE


def test_space_side_sections():
    parsed = InputParser.parse_file(str(CORPUS / "three.space"))
    assert InputParser.extra_sets(parsed, "ks") == [("p",), ("r",)]
    assert InputParser.extra_sets(parsed, "vs") == [("p", "q"), ("r",)]
    assert InputParser.extra_functions(parsed)["double"] == el("2*p + q")
    measure = InputParser.extra_measure(parsed)
    assert measure[()] == "0"
    assert measure[("p", "q", "r")] == "3"


def test_layered_blocks_must_be_contiguous():
    with pytest.raises(InputParseException):
        parse("kind: layered\n[level 1] a1\n[level 2] a2\n[level 3] a3\n[block 2] a3 -> a2")


def test_layered_vertex_must_receive_an_edge():
    with pytest.raises(ValidationException):
        parse("kind: layered\n[level 1] a1 b1\n[level 2] a2\n[block 1] a2 -> a1")


def test_graph_action_section():
    parsed = InputParser.parse_file(str(CORPUS / "swapped_loops.graph"))
    assert parsed.action is not None
    assert parsed.action.act_vertex("s", "u") == "w"
    assert parsed.action.act_edge("s", "eu") == "ew"
    assert InputParser.monoid_element(parsed, "w") == el("u")


def test_groupoid_is_read_through_its_type_semigroup():
    parsed = InputParser.parse_file(str(CORPUS / "pair.groupoid"))
    presentation = InputParser.monoid_subject(parsed)
    assert "U_p" in presentation.generators
    assert InputParser.monoid_element(parsed, "p + q") == el("U_p_q")


def test_spaces_have_no_monoid():
    parsed = InputParser.parse_file(str(CORPUS / "three.space"))
    with pytest.raises(ValidationException):
        InputParser.monoid_subject(parsed)


def test_builtin_inputs():
    parsed = InputParser.load("builtin:drunken")
    assert parsed.kind == InputKind.LAYERED
    assert parsed.value.levels[0] == ("a1", "b1")
    with pytest.raises(ValidationException):
        InputParser.load("builtin:nothing")


def test_missing_file(tmp_path):
    with pytest.raises(ValidationException) as info:
        InputParser.parse_file(str(tmp_path / "absent.mon"))
    assert info.value.error_code == ErrorCode.INVALID_INPUT


def test_digest_depends_only_on_bytes(tmp_path):
    path = tmp_path / "cuntz.graph"
    path.write_text(CUNTZ2)
    first = InputParser.parse_file(str(path))
    second = InputParser.parse_file(str(path))
    assert first.digest == second.digest
    assert first.digest != parse(CUNTZ2 + "# changed").digest
