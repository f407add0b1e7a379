"""
``typesemi graph ...``: finite graphs with a self-similar group action and
layered graphs, including the built-in drunken ladder (``builtin:drunken``).
"""

from fractions import Fraction

import click

from app.cli.operations import build_report, dumped, operation, require, truth
from app.cli.runner import execute
from app.exceptions import ValidationException
from app.models.error_models import ErrorCode
from app.models.graph_models import Graph, LayeredGraph, SelfSimilarAction
from app.parsers.input_parser import BUILTIN_PREFIX, InputParser
from app.services.drunken_service import DrunkenService
from app.services.graph_service import GraphService
from app.utils.qphi import format_qphi
from app.utils.rationals import fmt

DEFAULT_DEPTH = 20


def _load(source: str):
    parsed = InputParser.load(source)
    return parsed, parsed.value, parsed.action or SelfSimilarAction.trivial()


def _finite(parsed) -> Graph:
    if not isinstance(parsed.value, Graph):
        raise ValidationException(
            message="this command needs a finite graph",
            error_code=ErrorCode.INVALID_INPUT,
            field="kind",
            value=parsed.kind.value,
            constraint="graph",
        )
    return parsed.value


def _depth(args) -> int:
    return int(args.get("depth", DEFAULT_DEPTH))


@operation("graph theta")
def theta_report(source, args, settings):
    parsed, _, _ = _load(source)
    graph = _finite(parsed)
    f = InputParser.parse_element(require(args, "f"))
    if args.get("g"):
        g = InputParser.parse_element(args["g"])
        judgement = GraphService.sim_theta(graph, f, g, settings.budget)
        return build_report("graph theta", parsed, args, settings, judgement=judgement)
    image = GraphService.theta(graph, f, int(args.get("n", "1")))
    return build_report("graph theta", parsed, args, settings, payload={"theta": str(image)})


@operation("graph compare")
def compare_report(source, args, settings):
    parsed, _, action = _load(source)
    graph = _finite(parsed)
    f = InputParser.parse_element(require(args, "f"))
    g = InputParser.parse_element(require(args, "g"))
    judgement = GraphService.precsim_graph(graph, f, g, action, settings.budget)
    return build_report("graph compare", parsed, args, settings, judgement=judgement)


@operation("graph classify")
def classify_report(source, args, settings):
    parsed, subject, _ = _load(source)
    depth = _depth(args) if isinstance(subject, LayeredGraph) else None
    result = GraphService.classify_dichotomy(subject, parsed.action, depth, settings.budget)
    return build_report(
        "graph classify", parsed, args, settings, verdict=result.verdict.value, payload={"dichotomy": dumped(result)}
    )


def _ladder_payload(depth: int) -> dict:
    lo, hi = DrunkenService.ratio_interval(depth)
    sums = DrunkenService.partial_sums(depth)
    return {
        "cassini": truth(DrunkenService.cassini_check(depth)),
        "ratio_interval": [fmt(lo), fmt(hi)],
        "ratio_width": fmt(hi - lo),
        "tail_sum": format_qphi(sums[-1]),
    }


@operation("graph trace")
def trace_report(source, args, settings):
    parsed, subject, action = _load(source)
    if isinstance(subject, LayeredGraph):
        depth = _depth(args)
        enclosure = DrunkenService.layered_trace_enclosure(subject, depth)
        traces = [dumped(enclosure)]
        payload = {"traces": traces}
        verdict = "ENCLOSED" if enclosure.infeasible_at is None else "INFEASIBLE"
        if parsed.path == f"{BUILTIN_PREFIX}drunken":
            traces.insert(0, dumped(DrunkenService.drunken_trace(depth)))
            payload["ladder"] = _ladder_payload(depth)
            verdict = "EXACT"
        return build_report("graph trace", parsed, args, settings, verdict=verdict, payload=payload)

    cone = GraphService.graph_trace_cone(subject)
    payload = {"cone": dumped(cone)}
    if parsed.action is not None:
        quotient = GraphService.quotient_graph(subject, action)
        lifts = []
        for ray in GraphService.graph_trace_cone(quotient).rays:
            values = {v: Fraction(0) for v in quotient.vertices}
            values.update((v, Fraction(x)) for v, x in ray)
            lifted = GraphService.gamma_trace_convert(subject, action, values)
            back = GraphService.quotient_trace(subject, action, lifted)
            lifts.append(
                {
                    "quotient": {v: fmt(x) for v, x in values.items()},
                    "lifted": {v: fmt(x) for v, x in lifted.items()},
                    "round_trip": truth(back == values),
                }
            )
        payload["gamma_lifts"] = lifts
    return build_report("graph trace", parsed, args, settings, verdict="NONTRIVIAL" if cone.nontrivial else "TRIVIAL", payload=payload)


@operation("graph quotient")
def quotient_report(source, args, settings):
    parsed, _, action = _load(source)
    graph = _finite(parsed)
    payload = {
        "quotient": dumped(GraphService.quotient_graph(graph, action)),
        "representatives": GraphService.orbit_representatives(graph, action),
    }
    return build_report("graph quotient", parsed, args, settings, payload=payload)


@operation("graph cofinal")
def cofinal_report(source, args, settings):
    parsed, _, action = _load(source)
    graph = _finite(parsed)
    cofinal, witness = GraphService.is_cofinal(graph)
    payload = {"witness": list(witness) if witness else None}
    if parsed.action is not None:
        quotient_cofinal, _ = GraphService.is_cofinal(GraphService.quotient_graph(graph, action))
        gamma_cofinal, gamma_witness = GraphService.gamma_cofinal_bruteforce(graph, action)
        payload["quotient_cofinal"] = truth(quotient_cofinal)
        payload["gamma_cofinal"] = truth(gamma_cofinal)
        if gamma_witness:
            payload["gamma_witness"] = list(gamma_witness)
    payload = {key: value for key, value in payload.items() if value is not None}
    return build_report("graph cofinal", parsed, args, settings, verdict=truth(cofinal), payload=payload)


# ----------------------------------------------------------------------
# click surface
# ----------------------------------------------------------------------


@click.group()
def graph():
    """Graphs with self-similar actions: Θ, comparison, traces and the dichotomy."""


@graph.command()
@click.argument("source")
@click.option("--f", "f", required=True, help="Vertex function, e.g. 'v' or 'u + 2*w'")
@click.option("--g", "g", help="Decide f ∼ g through Θ instead of printing Θ^n(f)")
@click.option("--n", "n", default=1, show_default=True, type=click.IntRange(min=0))
@click.pass_context
def theta(ctx, source, f, g, n):
    """Apply Θ^n to f, or compare f and g through Θ."""
    execute(ctx, "graph theta", source, {"f": f, "g": g, "n": None if g else n})


@graph.command()
@click.argument("source")
@click.option("--f", "f", required=True)
@click.option("--g", "g", required=True)
@click.pass_context
def compare(ctx, source, f, g):
    """Decide f ≼ g for the group action on the graph."""
    execute(ctx, "graph compare", source, {"f": f, "g": g})


def _depth_option(command):
    return click.option(
        "--depth", type=click.IntRange(min=1), default=None, help=f"Truncation depth for layered inputs [default: {DEFAULT_DEPTH}]"
    )(command)


@graph.command()
@click.argument("source")
@_depth_option
@click.pass_context
def classify(ctx, source, depth):
    """Purely infinite, stably finite, or the precondition that fails."""
    execute(ctx, "graph classify", source, {"depth": depth})


@graph.command()
@click.argument("source")
@_depth_option
@click.pass_context
def trace(ctx, source, depth):
    """Graph traces: the cone on finite graphs, exact values and enclosures on layered ones."""
    execute(ctx, "graph trace", source, {"depth": depth})


@graph.command()
@click.argument("source")
@click.pass_context
def quotient(ctx, source):
    """The quotient graph E/Γ and the orbit representatives."""
    execute(ctx, "graph quotient", source, {})


@graph.command()
@click.argument("source")
@click.pass_context
def cofinal(ctx, source):
    """Cofinality, and Γ-cofinality checked directly when an action is given."""
    execute(ctx, "graph cofinal", source, {})
