"""
Line-oriented input formats.

Every file starts with ``kind: <kind>``; the rest is a sequence of
``[section]`` headers followed by content lines. Text after ``#`` is a
comment. Tokens may follow a header on the same line, as in
``[level 1] a1 b1``.
"""

import hashlib
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import logfire
from pydantic import ValidationError

from app.exceptions import ValidationException, parse_error
from app.models.error_models import ErrorCode
from app.models.graph_models import Edge, FiniteGroup, Graph, LayeredGraph, SelfSimilarAction
from app.models.input_models import InputKind, ParsedInput, SectionLine
from app.models.lattice_models import FiniteSpace
from app.models.monoid_models import Element, FiniteMonoid, MonoidPresentation, Relation, RelationKind
from app.models.groupoid_models import PartialBijection
from app.services.finite_monoid_service import FiniteMonoidService
from app.services.graph_service import GraphService
from app.services.groupoid_service import GroupoidService
from app.utils.rationals import parse_ext

Sections = Dict[str, List[SectionLine]]

_NAME = r"[A-Za-z_][\w']*"
_TERM = re.compile(rf"^(?:(\d+)\s*\*?\s*)?({_NAME})$")
_HEADER = re.compile(r"^kind\s*:\s*(\S+)$")
_SECTION = re.compile(r"^\[([^\]]+)\](.*)$")
_EDGE = re.compile(rf"^({_NAME})\s*:\s*([\w']+)\s*->\s*([\w']+)$")
_MAPSTO = re.compile(r"^([\w']+)\s*->\s*([\w']+)$")
_COCYCLE = re.compile(rf"^({_NAME})\s*\|\s*({_NAME})\s*=\s*({_NAME})$")
_LABELLED = re.compile(rf"^({_NAME})\s*:(.*)$")

ALLOWED_SECTIONS = {
    InputKind.MONOID: {"generators", "relations"},
    InputKind.FINITE_MONOID: {"elements", "zero", "add", "leq"},
    InputKind.SPACE: {"points", "opens", "basis", "ks", "vs", "functions", "nu"},
    InputKind.GROUPOID: {"points", "bisections"},
    InputKind.GRAPH: {"vertices", "edges", "group", "mult", "vact", "eact", "cocycle"},
    InputKind.LAYERED: {"level", "block", "period"},
}

EXTRA_SECTIONS = {"ks", "vs", "functions", "nu"}

BUILTIN_PREFIX = "builtin:"


def _strip_comment(text: str) -> str:
    index = text.find("#")
    return text if index < 0 else text[:index]


def _tokens(lines: Sequence[SectionLine]) -> List[Tuple[str, SectionLine]]:
    out = []
    for entry in lines:
        for token in re.split(r"[\s,]+", entry.text.strip()):
            if token:
                out.append((token, entry))
    return out


def _column(entry: SectionLine, fragment: str) -> int:
    """1-based column of ``fragment`` within the original line."""
    return entry.text.find(fragment) + 1 if fragment in entry.text else 1


def _invalid(e: ValidationError, code: ErrorCode, field: str) -> ValidationException:
    first = e.errors()[0]
    constraint = str(first.get("msg", "invalid")).removeprefix("Value error, ")
    return ValidationException(
        message=f"invalid {field}: {constraint}",
        error_code=code,
        field=field,
        constraint=constraint,
    )


class InputParser:
    """
    Parser for the monoid, finite-monoid, space, groupoid, graph and layered formats
    """

    @staticmethod
    def parse_file(path: str) -> ParsedInput:
        try:
            raw = Path(path).read_bytes()
        except OSError as e:
            raise ValidationException(
                message=f"cannot read input file {path}",
                error_code=ErrorCode.INVALID_INPUT,
                field="path",
                value=path,
                suggestion=str(e),
            ) from e
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise parse_error("input is not valid UTF-8", line=None) from e
        return InputParser.parse_text(text, path=path, digest=hashlib.sha256(raw).hexdigest())

    @staticmethod
    def parse_text(text: str, path: Optional[str] = None, digest: Optional[str] = None) -> ParsedInput:
        """
        Parse a whole input document.

        Raises:
            InputParseException: On syntax errors, with line and column
            ValidationException: When the parsed value violates a model invariant
        """
        digest = digest or hashlib.sha256(text.encode("utf-8")).hexdigest()
        kind, sections, order = InputParser._split(text)
        with logfire.span("parser.parse_text", kind=kind.value, path=path):
            allowed = ALLOWED_SECTIONS[kind]
            for name in order:
                family = name.split()[0]
                if family not in allowed:
                    first = sections[name][0] if sections[name] else None
                    raise parse_error(
                        f"section [{name}] is not valid for kind {kind.value}",
                        line=first.line if first else None,
                        column=1,
                    )

            action = None
            if kind == InputKind.MONOID:
                value = InputParser._monoid(sections)
            elif kind == InputKind.FINITE_MONOID:
                value = InputParser._finite_monoid(sections)
            elif kind == InputKind.SPACE:
                value = InputParser._space(sections)
            elif kind == InputKind.GROUPOID:
                value = InputParser._groupoid(sections)
            elif kind == InputKind.GRAPH:
                value, action = InputParser._graph(sections)
            else:
                value = InputParser._layered(sections, order)

            extras = {
                name: tuple(lines) for name, lines in sections.items() if name in EXTRA_SECTIONS
            }
            logfire.info("parser.parse_text done", kind=kind.value, sections=len(order))
            return ParsedInput(kind=kind, path=path, digest=digest, value=value, action=action, extras=extras)

    @staticmethod
    def _split(text: str) -> Tuple[InputKind, Sections, List[str]]:
        kind: Optional[InputKind] = None
        sections: Sections = {}
        order: List[str] = []
        current: Optional[str] = None
        for number, raw in enumerate(text.splitlines(), start=1):
            line = _strip_comment(raw).rstrip()
            if not line.strip():
                continue
            if kind is None:
                match = _HEADER.match(line.strip())
                if match is None:
                    raise parse_error("expected a 'kind: <kind>' header", line=number, column=1)
                try:
                    kind = InputKind(match.group(1))
                except ValueError as e:
                    allowed = ", ".join(k.value for k in InputKind)
                    raise parse_error(
                        f"unknown kind '{match.group(1)}' (expected one of {allowed})",
                        line=number,
                        column=line.find(match.group(1)) + 1,
                    ) from e
                continue
            section = _SECTION.match(line.strip())
            if section is not None:
                current = " ".join(section.group(1).split())
                if current in sections:
                    raise parse_error(f"duplicate section [{current}]", line=number, column=1)
                sections[current] = []
                order.append(current)
                inline = section.group(2)
                if inline.strip():
                    sections[current].append(SectionLine(line=number, text=inline))
                continue
            if current is None:
                raise parse_error("content before the first [section]", line=number, column=1)
            sections[current].append(SectionLine(line=number, text=line))
        if kind is None:
            raise parse_error("empty input: missing 'kind: <kind>' header", line=1, column=1)
        return kind, sections, order

    @staticmethod
    def _require(sections: Sections, name: str) -> List[SectionLine]:
        if name not in sections:
            raise parse_error(f"missing section [{name}]")
        return sections[name]

    # ------------------------------------------------------------------
    # elements
    # ------------------------------------------------------------------

    @staticmethod
    def parse_element(text: str, line: Optional[int] = None, column: int = 1) -> Element:
        """
        Parse ``2*a + b`` (also ``2a``); ``0`` is the empty combination.
        """
        coefficients: Dict[str, int] = {}
        offset = 0
        for term in text.split("+"):
            stripped = term.strip()
            at = column + offset + (len(term) - len(term.lstrip()))
            offset += len(term) + 1
            if stripped == "0":
                continue
            match = _TERM.match(stripped)
            if match is None:
                raise parse_error(f"cannot read term '{stripped}'", line=line, column=at)
            k = int(match.group(1)) if match.group(1) else 1
            coefficients[match.group(2)] = coefficients.get(match.group(2), 0) + k
        return Element.of(coefficients)

    @staticmethod
    def _monoid(sections: Sections) -> MonoidPresentation:
        generators = [t for t, _ in _tokens(InputParser._require(sections, "generators"))]
        relations: List[Relation] = []
        for entry in sections.get("relations", []):
            op = "<=" if "<=" in entry.text else "==" if "==" in entry.text else None
            if op is None:
                raise parse_error("relation needs '<=' or '=='", line=entry.line, column=1)
            left, right = entry.text.split(op, 1)
            lhs = InputParser.parse_element(left, entry.line, 1)
            rhs = InputParser.parse_element(right, entry.line, len(left) + len(op) + 1)
            kind = RelationKind.LEQ if op == "<=" else RelationKind.EQ
            relations.append(Relation(lhs=lhs, rhs=rhs, kind=kind))
            for name in lhs.support() + rhs.support():
                if name not in generators:
                    raise parse_error(
                        f"relation uses undeclared generator '{name}'",
                        line=entry.line,
                        column=_column(entry, name),
                    )
        try:
            return MonoidPresentation(generators=tuple(generators), relations=tuple(relations))
        except ValidationError as e:
            raise _invalid(e, ErrorCode.INVALID_INPUT, "presentation") from e

    # ------------------------------------------------------------------
    # finite monoids
    # ------------------------------------------------------------------

    @staticmethod
    def _finite_monoid(sections: Sections) -> FiniteMonoid:
        elements = [t for t, _ in _tokens(InputParser._require(sections, "elements"))]
        index = {name: i for i, name in enumerate(elements)}
        zero = 0
        if "zero" in sections:
            zero_tokens = _tokens(sections["zero"])
            if len(zero_tokens) != 1 or zero_tokens[0][0] not in index:
                raise parse_error("[zero] names one declared element", line=sections["zero"][0].line if sections["zero"] else None)
            zero = index[zero_tokens[0][0]]

        add: List[Tuple[int, ...]] = []
        for entry in InputParser._require(sections, "add"):
            row = []
            for token, _ in _tokens([entry]):
                if token not in index:
                    raise parse_error(f"unknown element '{token}' in [add]", line=entry.line, column=_column(entry, token))
                row.append(index[token])
            add.append(tuple(row))

        try:
            if "leq" not in sections:
                return FiniteMonoidService.algebraic(tuple(elements), tuple(add), zero)
            leq: List[Tuple[bool, ...]] = []
            for entry in sections["leq"]:
                row = []
                for token, _ in _tokens([entry]):
                    if token not in ("0", "1"):
                        raise parse_error(f"[leq] entries are 0 or 1, got '{token}'", line=entry.line, column=_column(entry, token))
                    row.append(token == "1")
                leq.append(tuple(row))
            return FiniteMonoid(elements=tuple(elements), add=tuple(add), zero=zero, leq=tuple(leq))
        except ValidationError as e:
            raise _invalid(e, ErrorCode.INVALID_TABLE, "table") from e
        except IndexError as e:
            raise ValidationException(
                message="add table must be n x n",
                error_code=ErrorCode.INVALID_TABLE,
                field="add",
                constraint=f"{len(elements)} rows of {len(elements)} entries",
            ) from e

    # ------------------------------------------------------------------
    # spaces and groupoids
    # ------------------------------------------------------------------

    @staticmethod
    def parse_set(entry: SectionLine) -> Tuple[str, ...]:
        """One set per line: points separated by spaces or commas; ``{}`` or ``-`` is empty."""
        body = entry.text.strip().strip("{}").strip()
        if body in ("", "-", "∅"):
            return ()
        return tuple(t for t, _ in _tokens([SectionLine(line=entry.line, text=body)]))

    @staticmethod
    def _space(sections: Sections) -> FiniteSpace:
        points = [t for t, _ in _tokens(InputParser._require(sections, "points"))]
        try:
            if "basis" in sections:
                basis = [InputParser.parse_set(entry) for entry in sections["basis"]]
                return FiniteSpace.generated_by(points, basis)
            opens = [InputParser.parse_set(entry) for entry in sections.get("opens", [])]
            return FiniteSpace(points=tuple(points), opens=tuple(opens))
        except ValidationError as e:
            raise _invalid(e, ErrorCode.INVALID_SPACE, "opens") from e

    @staticmethod
    def parse_pairs(text: str, line: int) -> List[Tuple[str, str]]:
        pairs = []
        for chunk in text.split(","):
            if not chunk.strip():
                continue
            match = _MAPSTO.match(chunk.strip())
            if match is None:
                raise parse_error(f"expected 'x -> y', got '{chunk.strip()}'", line=line)
            pairs.append((match.group(1), match.group(2)))
        return pairs

    @staticmethod
    def _groupoid(sections: Sections):
        points = [t for t, _ in _tokens(InputParser._require(sections, "points"))]
        names: List[str] = []
        generators: List[PartialBijection] = []
        for entry in InputParser._require(sections, "bisections"):
            match = _LABELLED.match(entry.text.strip())
            if match is None:
                raise parse_error("expected 'name: x->y, ...'", line=entry.line, column=1)
            try:
                generators.append(PartialBijection(pairs=tuple(InputParser.parse_pairs(match.group(2), entry.line))))
            except ValidationError as e:
                raise _invalid(e, ErrorCode.INVALID_ACTION, f"bisection {match.group(1)}") from e
            names.append(match.group(1))
        return GroupoidService.close_inverse_semigroup(points, generators, names)

    # ------------------------------------------------------------------
    # graphs
    # ------------------------------------------------------------------

    @staticmethod
    def _graph(sections: Sections) -> Tuple[Graph, Optional[SelfSimilarAction]]:
        vertices = [t for t, _ in _tokens(InputParser._require(sections, "vertices"))]
        edges: List[Edge] = []
        for entry in sections.get("edges", []):
            match = _EDGE.match(entry.text.strip())
            if match is None:
                raise parse_error("expected 'name: source -> range'", line=entry.line, column=1)
            edges.append(Edge(name=match.group(1), source=match.group(2), range=match.group(3)))
        try:
            graph = Graph(vertices=tuple(vertices), edges=tuple(edges))
        except ValidationError as e:
            raise _invalid(e, ErrorCode.INVALID_INPUT, "graph") from e

        if not any(name in sections for name in ("group", "mult", "vact", "eact", "cocycle")):
            return graph, None
        action = InputParser._action(sections)
        GraphService.check_action(graph, action)
        return graph, action

    @staticmethod
    def _action(sections: Sections) -> SelfSimilarAction:
        elements = [t for t, _ in _tokens(InputParser._require(sections, "group"))]
        if "mult" in sections:
            rows = [tuple(t for t, _ in _tokens([entry])) for entry in sections["mult"]]
        elif len(elements) == 1:
            rows = [(elements[0],)]
        else:
            raise parse_error("missing section [mult]")
        try:
            group = FiniteGroup(elements=tuple(elements), table=tuple(rows))
        except ValidationError as e:
            raise _invalid(e, ErrorCode.INVALID_ACTION, "group") from e

        def labelled_pairs(section: str) -> List[Tuple[str, str, str]]:
            out = []
            for entry in sections.get(section, []):
                match = _LABELLED.match(entry.text.strip())
                if match is None:
                    raise parse_error("expected 'g: x->y, ...'", line=entry.line, column=1)
                out.extend((match.group(1), a, b) for a, b in InputParser.parse_pairs(match.group(2), entry.line))
            return out

        cocycle = []
        for entry in sections.get("cocycle", []):
            match = _COCYCLE.match(entry.text.strip())
            if match is None:
                raise parse_error("expected 'g|e = h'", line=entry.line, column=1)
            cocycle.append((match.group(1), match.group(2), match.group(3)))

        return SelfSimilarAction(
            group=group,
            vertex_action=tuple(labelled_pairs("vact")),
            edge_action=tuple(labelled_pairs("eact")),
            cocycle=tuple(cocycle),
        )

    @staticmethod
    def _layered(sections: Sections, order: Sequence[str]) -> LayeredGraph:
        levels: Dict[int, Tuple[str, ...]] = {}
        blocks: Dict[int, Tuple[Tuple[str, str], ...]] = {}
        period: Optional[int] = None
        for name in order:
            family, _, number = name.partition(" ")
            lines = sections[name]
            if not number.strip().isdigit():
                raise parse_error(f"section [{name}] needs a number", line=lines[0].line if lines else None)
            n = int(number)
            if family == "level":
                levels[n] = tuple(t for t, _ in _tokens(lines))
            elif family == "block":
                pairs: List[Tuple[str, str]] = []
                for entry in lines:
                    pairs.extend(InputParser.parse_pairs(entry.text, entry.line))
                blocks[n] = tuple(pairs)
            else:
                period = n
        if not levels or sorted(levels) != list(range(1, len(levels) + 1)):
            raise parse_error("levels must be numbered 1..L without gaps")
        if sorted(blocks) != list(range(1, len(levels))):
            raise parse_error("blocks must be numbered 1..L-1 without gaps")
        try:
            return LayeredGraph(
                levels=tuple(levels[n] for n in sorted(levels)),
                blocks=tuple(blocks[n] for n in sorted(blocks)),
                period=period,
            )
        except ValidationError as e:
            raise _invalid(e, ErrorCode.INVALID_INPUT, "layered graph") from e

    # ------------------------------------------------------------------
    # derived subjects
    # ------------------------------------------------------------------

    @staticmethod
    def builtin(name: str) -> ParsedInput:
        """Inputs addressed as ``builtin:<name>`` instead of a path."""
        from app.services.drunken_service import DrunkenService

        if name != "drunken":
            raise ValidationException(
                message=f"unknown builtin input '{name}'",
                error_code=ErrorCode.INVALID_INPUT,
                field="input",
                value=name,
                constraint="builtin:drunken",
            )
        source = f"{BUILTIN_PREFIX}{name}"
        return ParsedInput(
            kind=InputKind.LAYERED,
            path=source,
            digest=hashlib.sha256(source.encode("utf-8")).hexdigest(),
            value=DrunkenService.drunken_graph(1),
        )

    @staticmethod
    def load(source: str) -> ParsedInput:
        if source.startswith(BUILTIN_PREFIX):
            return InputParser.builtin(source[len(BUILTIN_PREFIX):])
        return InputParser.parse_file(source)

    @staticmethod
    def monoid_subject(parsed: ParsedInput) -> Union[MonoidPresentation, FiniteMonoid]:
        """
        The preordered monoid a monoid command works on: presentations and
        tables as given, groupoids through their type semigroup, graphs
        through W(Γ, E).
        """
        value = parsed.value
        if isinstance(value, (MonoidPresentation, FiniteMonoid)):
            return value
        if parsed.kind == InputKind.GROUPOID:
            return GroupoidService.export_presentation(value)
        if parsed.kind == InputKind.GRAPH:
            return GraphService.export_graph_presentation(value, parsed.action)
        raise ValidationException(
            message=f"inputs of kind {parsed.kind.value} have no monoid",
            error_code=ErrorCode.INVALID_INPUT,
            field="kind",
            value=parsed.kind.value,
            constraint="monoid, finite-monoid, groupoid or graph",
        )

    @staticmethod
    def monoid_element(parsed: ParsedInput, text: str) -> Element:
        """Parse an element in the input's own vocabulary and carry it into ``monoid_subject``."""
        x = InputParser.parse_element(text)
        if parsed.kind == InputKind.GROUPOID:
            return GroupoidService.to_presentation_element(parsed.value, x)
        if parsed.kind == InputKind.GRAPH:
            return GraphService.to_quotient_element(
                parsed.value, parsed.action or SelfSimilarAction.trivial(), x
            )
        return x

    # ------------------------------------------------------------------
    # space side sections
    # ------------------------------------------------------------------

    @staticmethod
    def extra_sets(parsed: ParsedInput, section: str) -> List[Tuple[str, ...]]:
        """``[ks]`` and ``[vs]``: one point set per line."""
        return [InputParser.parse_set(entry) for entry in parsed.extra_lines(section)]

    @staticmethod
    def extra_functions(parsed: ParsedInput) -> Dict[str, Element]:
        """``[functions]``: lines ``name: 2*p + q`` giving point multiplicities."""
        out: Dict[str, Element] = {}
        for entry in parsed.extra_lines("functions"):
            match = _LABELLED.match(entry.text.strip())
            if match is None:
                raise parse_error("expected 'name: element'", line=entry.line)
            body = match.group(2)
            out[match.group(1)] = InputParser.parse_element(body, entry.line, _column(entry, body.strip()))
        return out

    @staticmethod
    def extra_measure(parsed: ParsedInput) -> Dict[Tuple[str, ...], str]:
        """``[nu]``: lines ``{p, q} = 1/2``; the value may be ``INF``."""
        out: Dict[Tuple[str, ...], str] = {}
        for entry in parsed.extra_lines("nu"):
            subset, sep, value = entry.text.rpartition("=")
            if not sep or not value.strip():
                raise parse_error("expected '{points} = value'", line=entry.line)
            points = InputParser.parse_set(SectionLine(line=entry.line, text=subset))
            try:
                parse_ext(value.strip())
            except (ValueError, ZeroDivisionError) as e:
                raise parse_error(
                    f"cannot read value '{value.strip()}'", line=entry.line, column=_column(entry, value.strip())
                ) from e
            out[tuple(sorted(points))] = value.strip()
        return out
